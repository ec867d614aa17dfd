"""Consumption-based equity premium with log-normal or log-NIG consumption growth.

With CRRA utility and i.i.d. growth x = c_{t+1}/c_t,

    E R_e = E[x] / (b E[x^(1-a)]),    R_f = 1 / (b E[x^(-a)]),

so the log premium ln E R_e - ln R_f only involves exponential moments of
ln x.  Log-normal growth gives a*sigma^2; log-NIG growth gives a difference of
four square roots that tends to a*sigma^2 as alpha grows with beta = 0 and
delta = sigma^2 * alpha.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from ratfin.errors import DomainError, FitInfeasibleError, MomentNonexistenceError
from ratfin.laws import LogNormal
from ratfin.nig import NigParams, nig_fit_moments, nig_log_exp_moment
from ratfin.rng import map_ordered

__all__ = [
    "EconomyParams",
    "mp_premium_lognormal",
    "lognormal_expected_equity_return",
    "lognormal_riskfree",
    "nig_expected_equity_return",
    "nig_riskfree",
    "nig_premium",
    "standardized_nig_params",
    "premium_ratio",
    "ratio_feasible",
    "RatioSurface",
    "ratio_surface",
    "CalibrationReport",
    "calibrate_growth",
    "read_growth_csv",
]


@dataclass(frozen=True)
class EconomyParams:
    """Discount factor b, CRRA coefficient a and the law of ln(growth).

    a = 0 (risk neutrality) is accepted as the boundary case.
    """

    b: float
    a: float
    growth: Union[LogNormal, NigParams]

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise DomainError(f"discount factor b must lie in (0, 1), got {self.b!r}")
        if not self.a >= 0.0 or not math.isfinite(self.a):
            raise DomainError(f"CRRA coefficient a must be >= 0, got {self.a!r}")

    def _nig(self) -> NigParams:
        if not isinstance(self.growth, NigParams):
            raise DomainError("economy does not have log-NIG growth")
        return self.growth

    def _lognormal(self) -> LogNormal:
        if not isinstance(self.growth, LogNormal):
            raise DomainError("economy does not have log-normal growth")
        return self.growth


def mp_premium_lognormal(econ: EconomyParams) -> float:
    """a * sigma^2; independent of b and mu."""
    return econ.a * econ._lognormal().sigma2


def lognormal_expected_equity_return(econ: EconomyParams) -> float:
    g = econ._lognormal()
    return math.exp(g.log_exp_moment(1.0) - g.log_exp_moment(1.0 - econ.a)) / econ.b


def lognormal_riskfree(econ: EconomyParams) -> float:
    return 1.0 / (econ.b * math.exp(econ._lognormal().log_exp_moment(-econ.a)))


def _nig_moment(p: NigParams, s: float, what: str) -> float:
    try:
        return nig_log_exp_moment(p, s)
    except MomentNonexistenceError as exc:
        raise MomentNonexistenceError(s, p.alpha, p.beta, context=what) from exc


def nig_expected_equity_return(econ: EconomyParams) -> float:
    p = econ._nig()
    num = _nig_moment(p, 1.0, "expected equity return (exponent 1)")
    den = _nig_moment(p, 1.0 - econ.a, f"expected equity return (exponent 1-a = {1.0 - econ.a!r})")
    return math.exp(num - den) / econ.b


def nig_riskfree(econ: EconomyParams) -> float:
    p = econ._nig()
    lm = _nig_moment(p, -econ.a, f"risk-free rate (exponent -a = {-econ.a!r})")
    return 1.0 / (econ.b * math.exp(lm))


def _root_deficit(alpha: float, u: float) -> float:
    """alpha - sqrt(alpha^2 - u^2), written without cancellation for large alpha."""
    return u * u / (alpha + math.sqrt(alpha * alpha - u * u))


def nig_premium(econ: EconomyParams) -> float:
    """delta*(sqrt(A^2-B^2) - sqrt(A^2-(B-a)^2) - sqrt(A^2-(B+1)^2) + sqrt(A^2-(B+1-a)^2))."""
    p = econ._nig()
    a = econ.a
    alpha2, beta = p.alpha**2, p.beta
    for s, what in ((1.0, "exponent 1"), (1.0 - a, "exponent 1-a"), (-a, "exponent -a")):
        if not alpha2 - (beta + s) ** 2 > 0:
            raise MomentNonexistenceError(s, p.alpha, beta, context=f"equity premium ({what})")
    d = lambda u: _root_deficit(p.alpha, u)
    return p.delta * (d(beta - a) + d(beta + 1.0) - d(beta) - d(beta + 1.0 - a))


def standardized_nig_params(alpha_x: float, mu: float = 0.0) -> NigParams:
    """Unit-variance symmetric NIG: beta = 0, delta = alpha."""
    return NigParams(mu, alpha_x, 0.0, alpha_x)


def ratio_feasible(a, alpha_x):
    """alpha_x > max(|a|, 1, |1-a|): every radical in the ratio is real and positive."""
    a = np.asarray(a, dtype=float)
    alpha_x = np.asarray(alpha_x, dtype=float)
    bound = np.maximum(np.maximum(np.abs(a), 1.0), np.abs(1.0 - a))
    return alpha_x > bound


def premium_ratio(a: float, alpha_x: float) -> float:
    """NIG premium over log-normal premium for the unit-variance standardisation.

    R = alpha (alpha - sqrt(alpha^2 - a^2) - sqrt(alpha^2 - 1) + sqrt(alpha^2 - (1-a)^2)) / a
    """
    if a == 0:
        raise DomainError("ratio undefined at a = 0")
    if not ratio_feasible(a, alpha_x):
        raise DomainError(
            f"ratio needs alpha_x > max(|a|, 1, |1-a|); got a={a!r}, alpha_x={alpha_x!r}"
        )
    d = lambda u: _root_deficit(alpha_x, u)
    return alpha_x * (d(a) + d(1.0) - d(1.0 - a)) / a


@dataclass
class RatioSurface:
    a: np.ndarray
    alpha: np.ndarray
    R: np.ndarray  # (len(alpha), len(a)); nan where infeasible
    feasible: np.ndarray

    @property
    def n_masked(self) -> int:
        return int((~self.feasible).sum())

    def rows(self):
        for i, al in enumerate(self.alpha):
            for j, a in enumerate(self.a):
                ok = bool(self.feasible[i, j])
                yield {
                    "a": float(a),
                    "alpha": float(al),
                    "R": float(self.R[i, j]) if ok else "",
                    "feasible": int(ok),
                }


def ratio_surface(a_range: Sequence[float], alpha_range: Sequence[float],
                  resolution: Union[int, Sequence[int]] = 41) -> RatioSurface:
    """R on a rectangular grid; infeasible cells are masked, never raised.

    Rows (one per alpha value) are computed in parallel; output order is fixed.
    """
    if isinstance(resolution, (int, np.integer)):
        n_a = n_al = int(resolution)
    else:
        n_a, n_al = (int(r) for r in resolution)
    a_vals = np.linspace(a_range[0], a_range[1], n_a)
    al_vals = np.linspace(alpha_range[0], alpha_range[1], n_al)

    def row(_, al):
        out = np.full(n_a, np.nan)
        ok = ratio_feasible(a_vals, al) & (a_vals != 0)
        for j in np.flatnonzero(ok):
            out[j] = premium_ratio(float(a_vals[j]), float(al))
        return out, ok

    parts = map_ordered(row, list(al_vals))
    R = np.vstack([p[0] for p in parts])
    feasible = np.vstack([p[1] for p in parts])
    return RatioSurface(a_vals, al_vals, R, feasible)


@dataclass
class CalibrationReport:
    n: int
    lognormal: LogNormal
    nig: Optional[NigParams]
    warnings: List[str] = field(default_factory=list)
    rows: List[dict] = field(default_factory=list)


def read_growth_csv(path) -> np.ndarray:
    """Growth ratios from a CSV with header ``period,growth``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["period", "growth"]:
            raise DomainError(f"{path}: expected header 'period,growth', got {reader.fieldnames}")
        vals = []
        for lineno, rec in enumerate(reader, start=2):
            try:
                vals.append(float(rec["growth"]))
            except (TypeError, ValueError):
                raise DomainError(f"{path}: line {lineno}: growth is not a number: {rec['growth']!r}")
    return np.asarray(vals)


def calibrate_growth(growth: Sequence[float], a_grid: Sequence[float] = tuple(range(1, 16)),
                     b: float = 0.98) -> CalibrationReport:
    """Fit ln(growth) as normal (MLE) and NIG (moments); premia for each a.

    An infeasible NIG fit is not fatal: the report carries a warning and only
    the log-normal column is filled.  A degenerate (constant) series is.
    """
    x = np.asarray(growth, dtype=float)
    if x.size < 30:
        raise DomainError(f"need at least 30 growth observations, got {x.size}")
    if not np.all(x > 0):
        raise DomainError("growth ratios must be positive")
    lx = np.log(x)
    sigma2 = float(lx.var())
    if not sigma2 > 0:
        raise FitInfeasibleError("constraint variance > 0 violated (constant growth series)")
    ln_law = LogNormal(float(lx.mean()), sigma2)
    notes = []
    try:
        nig = nig_fit_moments(lx)
    except FitInfeasibleError as exc:
        nig = None
        notes.append(f"NIG fit infeasible, log-normal only: {exc}")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    rows = []
    for a in a_grid:
        rec = {"a": float(a), "lognormal_premium": mp_premium_lognormal(EconomyParams(b, a, ln_law))}
        if nig is None:
            rec["nig_premium"] = ""
            rec["nig_feasible"] = 0
        else:
            try:
                rec["nig_premium"] = nig_premium(EconomyParams(b, a, nig))
                rec["nig_feasible"] = 1
            except MomentNonexistenceError:
                rec["nig_premium"] = ""
                rec["nig_feasible"] = 0
        rows.append(rec)
    return CalibrationReport(int(x.size), ln_law, nig, notes, rows)
