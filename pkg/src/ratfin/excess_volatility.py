"""Predictability of excess returns from per-asset composite laws (log-normal or log-NIG).

For each asset the conditional expected log return is E_t ln z - ln E_t z
(the stochastic discount factor cancels in the stock-minus-bond difference).
The predictable variation of excess returns is the variance of that
difference across date-t states; zero means excess returns are unforecastable.

For log-NIG z, ln E_t z uses the exponential moment at s = 1, whose radical is
sqrt(alpha^2 - (beta + 1)^2).  The alternative with (beta - 1) is kept behind
``MomentCorrection.BETA_MINUS_ONE`` for comparison; sampling shows it is wrong
whenever beta != 0.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from ratfin.errors import DomainError, MomentNonexistenceError
from ratfin.laws import LogNormal
from ratfin.nig import NigParams

__all__ = [
    "Asset",
    "MomentCorrection",
    "CompositeVarLaw",
    "StateProcess",
    "Verdict",
    "log_mean_gap",
    "expected_excess_lognormal",
    "expected_excess_nig",
    "predictable_variation_lognormal",
    "predictable_variation_nig",
    "efficiency_verdict",
    "read_state_process_csv",
]


class Asset(enum.Enum):
    STOCK = "stock"
    BOND = "bond"


class MomentCorrection(enum.Enum):
    BETA_PLUS_ONE = "beta_plus_one"
    BETA_MINUS_ONE = "beta_minus_one"


@dataclass(frozen=True)
class CompositeVarLaw:
    """Conditional law of ln z_{t+1} for one asset in one state."""

    asset: Asset
    law: Union[LogNormal, NigParams]

    def __post_init__(self):
        if isinstance(self.law, NigParams):
            p = self.law
            if not p.alpha**2 > max(p.beta**2, (p.beta + 1.0) ** 2):
                raise MomentNonexistenceError(1.0, p.alpha, p.beta, context=f"{self.asset.value} law")
        elif not isinstance(self.law, LogNormal):
            raise DomainError(f"unsupported law {type(self.law).__name__}")


def _as_law(x):
    return x.law if isinstance(x, CompositeVarLaw) else x


def log_mean_gap(law, correction: MomentCorrection = MomentCorrection.BETA_PLUS_ONE) -> float:
    """E ln z - ln E z for a single asset (mu cancels)."""
    law = _as_law(law)
    if isinstance(law, LogNormal):
        return -0.5 * law.sigma2
    p = law
    shift = 1.0 if correction is MomentCorrection.BETA_PLUS_ONE else -1.0
    rad = p.alpha**2 - (p.beta + shift) ** 2
    if not rad > 0:
        raise MomentNonexistenceError(shift, p.alpha, p.beta)
    g = p.gamma
    return p.delta * p.beta / g - p.delta * shift * (2.0 * p.beta + shift) / (g + math.sqrt(rad))


def expected_excess_lognormal(stock, bond) -> float:
    """-sigma_S^2/2 + sigma_B^2/2."""
    s, b = _as_law(stock), _as_law(bond)
    if not (isinstance(s, LogNormal) and isinstance(b, LogNormal)):
        raise DomainError("expected_excess_lognormal needs log-normal laws")
    return -0.5 * s.sigma2 + 0.5 * b.sigma2


def expected_excess_nig(stock, bond,
                        correction: MomentCorrection = MomentCorrection.BETA_PLUS_ONE) -> float:
    s, b = _as_law(stock), _as_law(bond)
    if not (isinstance(s, NigParams) and isinstance(b, NigParams)):
        raise DomainError("expected_excess_nig needs NIG laws")
    return log_mean_gap(s, correction) - log_mean_gap(b, correction)


@dataclass(frozen=True)
class StateProcess:
    """Finite set of date-t states with probabilities and per-state laws."""

    probabilities: tuple
    stock: tuple
    bond: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        stock = tuple(_as_law(s) for s in self.stock)
        bond = tuple(_as_law(b) for b in self.bond)
        n = len(probs)
        if n == 0 or len(stock) != n or len(bond) != n:
            raise DomainError("probabilities, stock and bond laws must have the same non-zero length")
        if any(not (p >= 0 and math.isfinite(p)) for p in probs):
            raise DomainError("state probabilities must be non-negative")
        if abs(math.fsum(probs) - 1.0) > 1e-9:
            raise DomainError(f"state probabilities sum to {math.fsum(probs)!r}, not 1")
        kinds = {type(law) for law in stock + bond}
        if len(kinds) != 1:
            raise DomainError("all laws in a process must be of the same family")
        labels = tuple(self.labels) if self.labels is not None else tuple(str(i) for i in range(n))
        if len(labels) != n:
            raise DomainError("one label per state")
        for i in range(n):
            CompositeVarLaw(Asset.STOCK, stock[i])
            CompositeVarLaw(Asset.BOND, bond[i])
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "stock", stock)
        object.__setattr__(self, "bond", bond)
        object.__setattr__(self, "labels", labels)

    @property
    def family(self) -> str:
        return "lognormal" if isinstance(self.stock[0], LogNormal) else "nig"

    def __len__(self):
        return len(self.probabilities)


def _discrete_variance(probs: Sequence[float], values: Sequence[float]) -> float:
    vals = np.asarray(values, dtype=float)
    if np.all(vals == vals[0]):
        return 0.0
    p = np.asarray(probs, dtype=float)
    mean = float(np.dot(p, vals))
    return float(np.dot(p, (vals - mean) ** 2))


def predictable_variation_lognormal(process: StateProcess) -> float:
    """Variance across states of the expected excess return (= var(sS^2 - sB^2)/4)."""
    if process.family != "lognormal":
        raise DomainError("process laws are not log-normal")
    per_state = [expected_excess_lognormal(s, b) for s, b in zip(process.stock, process.bond)]
    return _discrete_variance(process.probabilities, per_state)


def predictable_variation_nig(process: StateProcess,
                              correction: MomentCorrection = MomentCorrection.BETA_PLUS_ONE) -> float:
    if process.family != "nig":
        raise DomainError("process laws are not NIG")
    per_state = []
    for label, s, b in zip(process.labels, process.stock, process.bond):
        try:
            per_state.append(expected_excess_nig(s, b, correction))
        except MomentNonexistenceError as exc:
            raise DomainError(f"state {label}: {exc}") from exc
    return _discrete_variance(process.probabilities, per_state)


@dataclass
class Verdict:
    efficient: bool
    measure: float
    tol: float
    family: str
    correction: Optional[str] = None

    @property
    def label(self) -> str:
        return "efficient" if self.efficient else "inefficient"

    def to_dict(self) -> dict:
        return {
            "verdict": self.label,
            "measure": self.measure,
            "tol": self.tol,
            "family": self.family,
            "correction": self.correction,
        }


def efficiency_verdict(process: StateProcess, law_kind: Optional[str] = None, tol: float = 1e-12,
                       correction: MomentCorrection = MomentCorrection.BETA_PLUS_ONE) -> Verdict:
    """Efficient iff the predictable variation is strictly below ``tol``.

    ``tol`` is an absolute threshold on the variance, so a nonzero measure below
    it still counts as efficient.
    """
    kind = law_kind or process.family
    if kind != process.family:
        raise DomainError(f"law_kind {kind!r} does not match the process family {process.family!r}")
    if kind == "lognormal":
        m = predictable_variation_lognormal(process)
        return Verdict(m < tol, m, tol, kind)
    m = predictable_variation_nig(process, correction)
    return Verdict(m < tol, m, tol, kind, correction.value)


_LN_COLS = ("stock_mu", "stock_sigma2", "bond_mu", "bond_sigma2")
_NIG_COLS = tuple(f"{a}_{k}" for a in ("stock", "bond") for k in ("mu", "alpha", "beta", "delta"))


def read_state_process_csv(path) -> StateProcess:
    """One row per state: ``probability`` plus either log-normal columns
    (stock_mu, stock_sigma2, bond_mu, bond_sigma2) or NIG columns
    (stock_mu, stock_alpha, stock_beta, stock_delta, and the bond_ analogues).
    An optional ``state`` column labels the rows.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = set(reader.fieldnames or ())
        if "probability" not in cols:
            raise DomainError(f"{path}: missing 'probability' column")
        if set(_NIG_COLS) <= cols:
            family = "nig"
        elif set(_LN_COLS) <= cols:
            family = "lognormal"
        else:
            raise DomainError(f"{path}: columns {sorted(cols)} match neither law family")
        probs: List[float] = []
        stock, bond, labels = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            try:
                probs.append(float(rec["probability"]))
                if family == "nig":
                    stock.append(NigParams(*(float(rec[f"stock_{k}"]) for k in ("mu", "alpha", "beta", "delta"))))
                    bond.append(NigParams(*(float(rec[f"bond_{k}"]) for k in ("mu", "alpha", "beta", "delta"))))
                else:
                    stock.append(LogNormal(float(rec["stock_mu"]), float(rec["stock_sigma2"])))
                    bond.append(LogNormal(float(rec["bond_mu"]), float(rec["bond_sigma2"])))
            except (TypeError, ValueError) as exc:
                raise DomainError(f"{path}: line {lineno}: {exc}") from exc
            labels.append(rec.get("state") or str(len(labels)))
    return StateProcess(tuple(probs), tuple(stock), tuple(bond), tuple(labels))
