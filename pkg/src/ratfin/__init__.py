"""Rational-finance numerics: predictable-price option pricing, NIG equity
premium and the log-NIG excess-volatility decomposition."""

__version__ = "0.1.0"

from ratfin.errors import (
    ConfigError,
    DomainError,
    FitInfeasibleError,
    MomentNonexistenceError,
    NumericalError,
    RatfinError,
)

__all__ = [
    "__version__",
    "ConfigError",
    "DomainError",
    "FitInfeasibleError",
    "MomentNonexistenceError",
    "NumericalError",
    "RatfinError",
]
