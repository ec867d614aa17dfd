import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import enumerate_state_variance, mc_log_mean_gap
from ratfin.errors import DomainError, MomentNonexistenceError
from ratfin.excess_volatility import (
    Asset,
    CompositeVarLaw,
    MomentCorrection,
    StateProcess,
    efficiency_verdict,
    expected_excess_lognormal,
    expected_excess_nig,
    log_mean_gap,
    predictable_variation_lognormal,
    predictable_variation_nig,
    read_state_process_csv,
)
from ratfin.laws import LogNormal
from ratfin.nig import NigParams, nig_gaussian_limit_params

LN = LogNormal


def two_state():
    return StateProcess((0.5, 0.5), (LN(0, 0.04), LN(0, 0.02)), (LN(0, 0.01), LN(0, 0.01)))


class TestSingleAsset:
    def test_lognormal_gap(self):
        assert log_mean_gap(LN(0.3, 0.08)) == pytest.approx(-0.04)

    def test_expected_excess_lognormal(self):
        assert expected_excess_lognormal(LN(0, 0.04), LN(1, 0.01)) == pytest.approx(-0.015)

    def test_symmetric_nig_corrections_agree(self):
        p = NigParams(0.0, 5.0, 0.0, 0.5)
        assert log_mean_gap(p, MomentCorrection.BETA_PLUS_ONE) == log_mean_gap(p, MomentCorrection.BETA_MINUS_ONE)

    def test_beta_plus_one_matches_sampling(self):
        params = (0.0, 4.0, 1.0, 1.0)
        est, se = mc_log_mean_gap(*params, 2_000_000, seed=21)
        p = NigParams(*params)
        assert abs(log_mean_gap(p, MomentCorrection.BETA_PLUS_ONE) - est) < 4 * se
        assert abs(log_mean_gap(p, MomentCorrection.BETA_MINUS_ONE) - est) > 4 * se

    def test_gap_is_jensen_negative(self):
        for p in (NigParams(0, 4, 1, 1), NigParams(0, 4, -1, 1), NigParams(2, 30, 0, 0.3)):
            assert log_mean_gap(p) < 0

    def test_moment_must_exist(self):
        with pytest.raises(MomentNonexistenceError):
            CompositeVarLaw(Asset.STOCK, NigParams(0, 2.0, 1.5, 1))
        with pytest.raises(MomentNonexistenceError):
            log_mean_gap(NigParams(0, 2.0, 1.5, 1))

    def test_unsupported_law(self):
        with pytest.raises(DomainError):
            CompositeVarLaw(Asset.BOND, 3.0)

    def test_family_mismatch(self):
        with pytest.raises(DomainError):
            expected_excess_nig(LN(0, 0.01), NigParams(0, 3, 0, 1))
        with pytest.raises(DomainError):
            expected_excess_lognormal(NigParams(0, 3, 0, 1), LN(0, 0.01))


class TestProcess:
    @pytest.mark.parametrize("probs", [(0.5, 0.6), (1.2, -0.2), ()])
    def test_invalid_probabilities(self, probs):
        n = len(probs)
        with pytest.raises(DomainError):
            StateProcess(probs, (LN(0, 0.01),) * n, (LN(0, 0.01),) * n)

    def test_mixed_families(self):
        with pytest.raises(DomainError):
            StateProcess((1.0,), (LN(0, 0.01),), (NigParams(0, 3, 0, 1),))

    def test_labels(self):
        assert two_state().labels == ("0", "1")
        assert len(two_state()) == 2


class TestPredictableVariation:
    def test_two_state_value(self):
        proc = two_state()
        per_state = [Fraction(-1, 2) * Fraction(s) + Fraction(1, 2) * Fraction(b)
                     for s, b in ((Fraction(4, 100), Fraction(1, 100)), (Fraction(2, 100), Fraction(1, 100)))]
        exact = enumerate_state_variance([Fraction(1, 2)] * 2, per_state)
        assert exact == Fraction(25, 10**6)
        assert predictable_variation_lognormal(proc) == pytest.approx(2.5e-5, rel=1e-12)

    def test_constant_process_is_exactly_zero(self):
        proc = StateProcess((0.2, 0.3, 0.5), (LN(0.1, 0.03),) * 3, (LN(0.0, 0.01),) * 3)
        assert predictable_variation_lognormal(proc) == 0.0
        v = efficiency_verdict(proc)
        assert v.efficient and v.label == "efficient" and v.measure == 0.0

    def test_constant_nig_process(self):
        s, b = NigParams(0, 5, 1, 0.2), NigParams(0, 8, -1, 0.1)
        proc = StateProcess((0.5, 0.5), (s, s), (b, b))
        assert predictable_variation_nig(proc) == 0.0

    def test_gaussian_limit(self):
        alpha = 1e3
        nig_proc = StateProcess(
            (0.5, 0.5),
            (nig_gaussian_limit_params(0.04, 0, alpha), nig_gaussian_limit_params(0.02, 0, alpha)),
            (nig_gaussian_limit_params(0.01, 0, alpha),) * 2,
        )
        assert predictable_variation_nig(nig_proc) == pytest.approx(2.5e-5, rel=0.01)

    def test_verdict_inefficient(self):
        v = efficiency_verdict(two_state())
        assert not v.efficient and v.label == "inefficient"
        assert v.to_dict()["family"] == "lognormal"

    def test_tolerance_is_absolute(self):
        assert efficiency_verdict(two_state(), tol=1e-4).efficient

    def test_law_kind_mismatch(self):
        with pytest.raises(DomainError):
            efficiency_verdict(two_state(), law_kind="nig")

    def test_nig_verdict_records_correction(self):
        proc = StateProcess((0.5, 0.5), (NigParams(0, 5, 1, 0.2), NigParams(0, 5, 0, 0.2)),
                            (NigParams(0, 8, 0, 0.1),) * 2)
        v = efficiency_verdict(proc, correction=MomentCorrection.BETA_MINUS_ONE)
        assert v.correction == "beta_minus_one" and v.family == "nig"

    def test_error_names_state(self):
        bad = NigParams(0, 2.5, -1.6, 1.0)  # fine for beta+1, not for beta-1
        proc = StateProcess((0.5, 0.5), (NigParams(0, 5, 0, 1), bad), (NigParams(0, 5, 0, 1),) * 2,
                            labels=("calm", "crash"))
        with pytest.raises(DomainError, match="state crash"):
            predictable_variation_nig(proc, MomentCorrection.BETA_MINUS_ONE)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0.01, 1.0), st.floats(0.0, 0.2), st.floats(0.0, 0.2)),
                    min_size=1, max_size=6))
    def test_matches_enumeration(self, states):
        w = [s[0] for s in states]
        probs = tuple(x / sum(w) for x in w)
        assume_sum = math.fsum(probs)
        proc = StateProcess(probs, tuple(LN(0, s[1]) for s in states),
                            tuple(LN(0, s[2]) for s in states))
        values = [-0.5 * s[1] + 0.5 * s[2] for s in states]
        ref = enumerate_state_variance(probs, values)
        assert abs(assume_sum - 1) < 1e-12
        assert predictable_variation_lognormal(proc) == pytest.approx(ref, rel=1e-9, abs=1e-18)


class TestCsv:
    def test_lognormal(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("state,probability,stock_mu,stock_sigma2,bond_mu,bond_sigma2\n"
                     "hi,0.5,0,0.04,0,0.01\nlo,0.5,0,0.02,0,0.01\n")
        proc = read_state_process_csv(f)
        assert proc.labels == ("hi", "lo")
        assert predictable_variation_lognormal(proc) == pytest.approx(2.5e-5)

    def test_nig(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("probability,stock_mu,stock_alpha,stock_beta,stock_delta,"
                     "bond_mu,bond_alpha,bond_beta,bond_delta\n1.0,0,5,1,0.2,0,8,0,0.1\n")
        proc = read_state_process_csv(f)
        assert proc.family == "nig" and proc.labels == ("0",)

    def test_bad_columns(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("probability,x\n1,2\n")
        with pytest.raises(DomainError, match="neither law family"):
            read_state_process_csv(f)

    def test_bad_value(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("probability,stock_mu,stock_sigma2,bond_mu,bond_sigma2\n1,0,x,0,0.01\n")
        with pytest.raises(DomainError, match="line 2"):
            read_state_process_csv(f)
