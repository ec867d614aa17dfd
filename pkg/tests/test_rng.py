import numpy as np
import pytest

from ratfin.rng import PATH_BLOCK, blocks, map_ordered, stream, worker_count


class TestStreams:
    def test_reproducible(self):
        a = stream(5, 1, 2).standard_normal(10)
        b = stream(5, 1, 2).standard_normal(10)
        np.testing.assert_array_equal(a, b)

    def test_keys_separate(self):
        a = stream(5, 1, 2).standard_normal(10)
        assert not np.array_equal(a, stream(5, 1, 3).standard_normal(10))
        assert not np.array_equal(a, stream(6, 1, 2).standard_normal(10))

    def test_large_seed(self):
        stream(2**64 - 1, 0).random()

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            stream(-1)


class TestBlocks:
    def test_cover(self):
        parts = blocks(5000)
        assert parts[0] == slice(0, PATH_BLOCK)
        assert sum(s.stop - s.start for s in parts) == 5000
        assert parts[-1].stop == 5000

    def test_empty(self):
        with pytest.raises(ValueError):
            blocks(0)


class TestWorkers:
    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv("RA_THREADS", "3")
        assert worker_count() == 3

    def test_zero_means_auto(self, monkeypatch):
        monkeypatch.setenv("RA_THREADS", "0")
        assert worker_count() >= 1

    def test_order_independent_of_threads(self, monkeypatch):
        fn = lambda i, s: stream(9, i).standard_normal(s.stop - s.start)
        monkeypatch.setenv("RA_THREADS", "1")
        one = np.concatenate(map_ordered(fn, blocks(10_000)))
        monkeypatch.setenv("RA_THREADS", "4")
        four = np.concatenate(map_ordered(fn, blocks(10_000)))
        np.testing.assert_array_equal(one, four)
