"""Exception hierarchy shared by every module."""


class RatfinError(Exception):
    """Base class for library errors."""


class DomainError(RatfinError, ValueError):
    """Parameters fall outside the domain where a quantity is defined."""


class MomentNonexistenceError(DomainError):
    """An exponential moment E[exp(sX)] does not exist for the given law."""

    def __init__(self, s, alpha, beta, context=""):
        self.s = s
        msg = (
            f"exponential moment of order s={s!r} does not exist: "
            f"(beta + s)^2 = {(beta + s) ** 2!r} >= alpha^2 = {alpha ** 2!r}"
        )
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class FitInfeasibleError(RatfinError, ValueError):
    """Sample moments admit no NIG law."""


class NumericalError(RatfinError, ArithmeticError):
    """A numerical routine failed (singular solve, non-finite state)."""


class ConfigError(RatfinError):
    """Invalid experiment configuration."""

    def __init__(self, message, key_path=None, line=None):
        self.message = message
        self.key_path = key_path
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key_path:
            where.append(key_path)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
