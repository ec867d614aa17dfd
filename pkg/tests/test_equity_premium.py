import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import mc_log_premium
from ratfin.equity_premium import (
    EconomyParams,
    calibrate_growth,
    lognormal_expected_equity_return,
    lognormal_riskfree,
    mp_premium_lognormal,
    nig_expected_equity_return,
    nig_premium,
    nig_riskfree,
    premium_ratio,
    ratio_feasible,
    ratio_surface,
    read_growth_csv,
    standardized_nig_params,
)
from ratfin.errors import DomainError, FitInfeasibleError, MomentNonexistenceError
from ratfin.laws import LogNormal
from ratfin.nig import NigParams, nig_gaussian_limit_params, nig_log_exp_moment, nig_sample


class TestEconomy:
    @pytest.mark.parametrize("b,a", [(0.0, 2.0), (1.0, 2.0), (0.9, -1.0), (0.9, math.inf)])
    def test_invalid(self, b, a):
        with pytest.raises(DomainError):
            EconomyParams(b, a, LogNormal(0.0, 0.01))

    def test_risk_neutral_boundary(self):
        econ = EconomyParams(0.98, 0.0, LogNormal(0.02, 0.01))
        assert mp_premium_lognormal(econ) == 0.0

    def test_wrong_family(self):
        with pytest.raises(DomainError):
            nig_premium(EconomyParams(0.98, 2.0, LogNormal(0.0, 0.01)))


class TestLogNormal:
    def test_premium(self):
        assert mp_premium_lognormal(EconomyParams(0.98, 10.0, LogNormal(0.018, 0.0013))) == pytest.approx(0.013)

    @pytest.mark.parametrize("a", [0.5, 2.0, 10.0])
    def test_returns_consistent_with_premium(self, a):
        econ = EconomyParams(0.97, a, LogNormal(0.018, 0.0013))
        gap = math.log(lognormal_expected_equity_return(econ)) - math.log(lognormal_riskfree(econ))
        assert gap == pytest.approx(mp_premium_lognormal(econ), rel=1e-12)

    def test_riskfree_value(self):
        econ = EconomyParams(0.98, 2.0, LogNormal(0.02, 0.01))
        assert lognormal_riskfree(econ) == pytest.approx(1 / (0.98 * math.exp(-0.04 + 0.02)))


class TestNigPremium:
    def test_returns_consistent_with_premium(self):
        econ = EconomyParams(0.98, 3.0, NigParams(0.01, 12.0, 1.5, 0.05))
        gap = math.log(nig_expected_equity_return(econ)) - math.log(nig_riskfree(econ))
        assert gap == pytest.approx(nig_premium(econ), rel=1e-12)

    def test_independent_of_b_and_mu(self):
        p = NigParams(0.0, 12.0, 1.5, 0.05)
        base = nig_premium(EconomyParams(0.98, 3.0, p))
        assert nig_premium(EconomyParams(0.5, 3.0, p.shifted(0.7))) == pytest.approx(base, rel=1e-13)

    def test_domain_error_names_exponent(self):
        econ = EconomyParams(0.98, 5.0, NigParams(0.0, 4.0, 0.0, 1.0))
        with pytest.raises(MomentNonexistenceError, match="exponent -a"):
            nig_riskfree(econ)
        with pytest.raises(MomentNonexistenceError, match="1-a"):
            nig_premium(econ)

    @pytest.mark.parametrize("alpha,gap", [(1e2, 8.25e-4), (1e3, 8.25e-6), (1e4, 8.25e-8)])
    def test_gaussian_limit_gap(self, alpha, gap):
        econ = EconomyParams(0.98, 3.0, nig_gaussian_limit_params(1.0, 0.0, alpha))
        assert abs(nig_premium(econ) - 3.0) == pytest.approx(gap, rel=0.01)

    def test_gaussian_limit_rate(self):
        gaps = [abs(nig_premium(EconomyParams(0.98, 3.0, nig_gaussian_limit_params(1.0, 0.0, al)))) - 3.0
                for al in (1e2, 1e3, 1e4)]
        gaps = [abs(g) for g in gaps]
        for a, b in zip(gaps, gaps[1:]):
            assert a / b == pytest.approx(100.0, rel=0.05)

    @pytest.mark.parametrize("params,a", [((0.02, 15.0, 0.0, 0.02), 2.0), ((0.0, 10.0, 2.0, 1.0), 3.0)])
    def test_against_sampling(self, params, a):
        est, se = mc_log_premium(*params, a, 1_000_000, seed=11)
        assert abs(nig_premium(EconomyParams(0.98, a, NigParams(*params))) - est) < 4 * se

    @settings(max_examples=200, deadline=None)
    @given(st.floats(2.0, 50.0), st.floats(-0.5, 0.5), st.floats(0.01, 5.0), st.floats(0.0, 1.0))
    def test_cumulant_identity_and_sign(self, alpha, ratio, delta, frac):
        p = NigParams(0.0, alpha, ratio * alpha, delta)
        a_max = alpha - abs(p.beta) - 1.0
        assume(a_max > 0)
        a = frac * a_max * 0.99
        econ = EconomyParams(0.98, a, p)
        c = lambda s: nig_log_exp_moment(p, s)
        prem = nig_premium(econ)
        assert prem == pytest.approx(c(1.0) - c(1.0 - a) + c(-a), abs=1e-12 * max(1.0, delta * alpha))
        assert prem >= -1e-12


class TestRatio:
    def test_reference_value(self):
        assert premium_ratio(10.0, 10.005) == pytest.approx(4.10624279273355, rel=1e-12)

    def test_large_alpha(self):
        assert premium_ratio(1.0, 1e3) == pytest.approx(1 + 1 / (4 * 1e6), rel=1e-12)
        assert premium_ratio(2.0, 1e4) == pytest.approx(1.00000001, abs=1e-9)

    def test_equals_standardized_premium_over_a(self):
        for a, al in [(3.0, 5.0), (10.0, 10.005), (0.5, 2.0)]:
            prem = nig_premium(EconomyParams(0.98, a, standardized_nig_params(al)))
            assert premium_ratio(a, al) == pytest.approx(prem / a, rel=1e-10)

    def test_standardized_variance(self):
        from ratfin.nig import nig_moments
        assert nig_moments(standardized_nig_params(7.0)).variance == pytest.approx(1.0)

    def test_infeasible(self):
        with pytest.raises(DomainError, match="alpha_x > max"):
            premium_ratio(10.0, 9.5)
        with pytest.raises(DomainError):
            premium_ratio(0.0, 5.0)

    def test_feasibility_mask(self):
        a = np.array([0.5, 1.0, 3.0, -2.0])
        np.testing.assert_array_equal(ratio_feasible(a, 2.5), [True, True, False, False])


class TestSurface:
    def test_reference_rectangle(self):
        s = ratio_surface((9.999, 10.001), (9.005, 10.01), (21, 202))
        A, AL = np.meshgrid(s.a, s.alpha)
        expected_mask = AL <= np.maximum(np.maximum(np.abs(A), 1.0), np.abs(1.0 - A))
        np.testing.assert_array_equal(~s.feasible, expected_mask)
        assert s.n_masked == int(expected_mask.sum()) > 0
        assert np.all(np.isnan(s.R[~s.feasible]))
        i, j = np.argwhere(s.feasible)[0]
        assert s.R[i, j] == pytest.approx(premium_ratio(s.a[j], s.alpha[i]), rel=1e-14)

    def test_rows_order_and_blanks(self):
        s = ratio_surface((1.0, 3.0), (1.5, 4.0), 3)
        rows = list(s.rows())
        assert len(rows) == 9
        assert rows[0]["a"] == 1.0 and rows[1]["a"] == 2.0
        assert all(r["R"] == "" for r in rows if not r["feasible"])

    def test_thread_invariance(self, monkeypatch):
        monkeypatch.setenv("RA_THREADS", "1")
        one = ratio_surface((1, 12), (2, 20), 30).R
        monkeypatch.setenv("RA_THREADS", "4")
        np.testing.assert_array_equal(one, ratio_surface((1, 12), (2, 20), 30).R)


class TestCalibration:
    def test_lognormal_series(self):
        rng = np.random.default_rng(0)
        g = np.exp(rng.normal(0.018, 0.036, 200))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rep = calibrate_growth(g, a_grid=(1, 5, 10))
        assert rep.n == 200
        assert rep.lognormal.sigma2 == pytest.approx(np.log(g).var())
        assert [r["a"] for r in rep.rows] == [1.0, 5.0, 10.0]
        assert rep.rows[1]["lognormal_premium"] == pytest.approx(5 * rep.lognormal.sigma2)

    def test_nig_series(self):
        g = np.exp(nig_sample(NigParams(0.018, 30.0, 3.0, 0.04), 5000, 2))
        rep = calibrate_growth(g)
        assert rep.nig is not None and not rep.warnings
        assert all(r["nig_feasible"] in (0, 1) for r in rep.rows)
        feasible = [r for r in rep.rows if r["nig_feasible"]]
        assert feasible and feasible[0]["nig_premium"] == pytest.approx(
            nig_premium(EconomyParams(0.98, feasible[0]["a"], rep.nig)))

    def test_infeasible_fit_warns(self):
        g = np.exp(np.linspace(-0.05, 0.05, 60))  # flat-topped: negative excess kurtosis
        with pytest.warns(RuntimeWarning, match="log-normal only"):
            rep = calibrate_growth(g)
        assert rep.nig is None
        assert all(r["nig_premium"] == "" for r in rep.rows)

    def test_constant_series(self):
        with pytest.raises(FitInfeasibleError, match="variance"):
            calibrate_growth(np.full(40, 1.02))

    def test_short_series(self):
        with pytest.raises(DomainError, match="at least 30"):
            calibrate_growth(np.full(10, 1.02))

    def test_read_csv(self, tmp_path):
        f = tmp_path / "g.csv"
        f.write_text("period,growth\n1,1.01\n2,0.99\n")
        np.testing.assert_array_equal(read_growth_csv(f), [1.01, 0.99])
        bad = tmp_path / "bad.csv"
        bad.write_text("year,value\n1,1.0\n")
        with pytest.raises(DomainError, match="period,growth"):
            read_growth_csv(bad)
        worse = tmp_path / "worse.csv"
        worse.write_text("period,growth\n1,abc\n")
        with pytest.raises(DomainError, match="line 2"):
            read_growth_csv(worse)
