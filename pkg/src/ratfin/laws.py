"""Conditional laws shared by the equity-premium and excess-volatility models."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from ratfin.errors import DomainError
from ratfin.nig import NigParams


@dataclass(frozen=True)
class LogNormal:
    """ln X ~ N(mu, sigma2)."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma2)):
            raise DomainError("log-normal parameters must be finite")
        if self.sigma2 < 0:
            raise DomainError(f"sigma2 must be >= 0, got {self.sigma2!r}")

    def log_exp_moment(self, s: float) -> float:
        """log E[X^s]."""
        return s * self.mu + 0.5 * s * s * self.sigma2


# ln X ~ NIG(params) is represented by the NigParams themselves.
Law = Union[LogNormal, NigParams]
