"""Seeded random streams and ordered block parallelism.

Every stochastic routine takes an explicit integer seed.  Paths are grouped
into fixed-size blocks; each block draws from its own Philox stream keyed by
``(seed, purpose, block index)``.  Because the block size is a constant, the
numbers a given path sees never depend on how many workers run or in which
order blocks finish.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

import numpy as np

PATH_BLOCK = 2048

T = TypeVar("T")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for ``seed`` and an integer key path."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def worker_count() -> int:
    """Thread cap from ``RA_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("RA_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def blocks(n_paths: int, block: int = PATH_BLOCK) -> List[slice]:
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    return [slice(i, min(i + block, n_paths)) for i in range(0, n_paths, block)]


def map_ordered(fn: Callable[[int, T], object], items: Sequence[T]) -> list:
    """Apply ``fn(index, item)`` to each item, results in input order."""
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(i, it) for i, it in enumerate(items)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        futures = [pool.submit(fn, i, it) for i, it in enumerate(items)]
        return [f.result() for f in futures]
