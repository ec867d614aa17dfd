"""European option pricing when the stock and the trader disagree on predictability.

The market prices with an alpha-SDE, the hedging trader with a gamma-SDE.  The
mismatch rho = gamma - alpha enters the hedging PDE only as a drift
adjustment, the dividend yield due to predictability

    D_y(t, x) = 2 rho (gamma + alpha) v(t, x) (v_x(t, x) x + v(t, x)),

after which the PDE is Black-Scholes with continuous yield D_y:

    C_t + (r - D_y) x C_x - r C + 1/2 v^2 x^2 C_xx = 0.

The solver is a theta-scheme on a uniform x grid with a node at the strike,
Dirichlet data at x_min, zero convexity at x_max and Rannacher start-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline
from scipy.stats import norm

from ratfin.errors import ConfigError, DomainError, NumericalError
from ratfin.rng import blocks, map_ordered, stream
from ratfin.stratonovich import PathGrid

__all__ = [
    "PredictableOptionProblem",
    "PdeGrid",
    "PriceSurface",
    "ReplicationWeights",
    "McPrice",
    "constant_problem",
    "dividend_yield",
    "pde_drift",
    "default_grid",
    "solve_pde",
    "bs_closed_form",
    "replication_weights",
    "mc_price_predictable",
]

_KINDS = ("call", "put", "custom")


def _const(c: float) -> Callable:
    return lambda t, x: c + 0.0 * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class PredictableOptionProblem:
    """Coefficients, predictability pair and payoff of a European claim.

    ``v_fn``, ``v_x_fn`` and ``r_fn`` take ``(t, x)`` and must broadcast over
    arrays of x.  ``kind`` selects the boundary data; ``custom`` uses
    ``payoff`` and discounts its x_min value.
    """

    v_fn: Callable
    v_x_fn: Callable
    r_fn: Callable
    alpha_market: float
    gamma_trader: float
    maturity: float
    strike: float
    spot: float
    kind: str = "call"
    payoff: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("alpha_market", "gamma_trader"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {val!r}")
        if not self.maturity > 0:
            raise DomainError(f"maturity must be > 0, got {self.maturity!r}")
        if not self.spot > 0:
            raise DomainError(f"spot must be > 0, got {self.spot!r}")
        if self.kind not in _KINDS:
            raise DomainError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.kind == "custom" and self.payoff is None:
            raise DomainError("custom kind requires a payoff function")

    @property
    def rho(self) -> float:
        """Excess predictability gamma - alpha."""
        return self.gamma_trader - self.alpha_market

    def terminal_payoff(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "call":
            return np.maximum(x - self.strike, 0.0)
        if self.kind == "put":
            return np.maximum(self.strike - x, 0.0)
        return np.asarray(self.payoff(x), dtype=float) + 0.0 * x


def constant_problem(
    spot: float,
    strike: float,
    maturity: float,
    vol: float,
    rate: float,
    alpha_market: float = 0.0,
    gamma_trader: float = 0.0,
    kind: str = "call",
    payoff: Optional[Callable] = None,
) -> PredictableOptionProblem:
    """Problem with constant volatility and short rate (v_x = 0)."""
    return PredictableOptionProblem(
        v_fn=_const(vol),
        v_x_fn=_const(0.0),
        r_fn=_const(rate),
        alpha_market=alpha_market,
        gamma_trader=gamma_trader,
        maturity=maturity,
        strike=strike,
        spot=spot,
        kind=kind,
        payoff=payoff,
    )


def dividend_yield(problem: PredictableOptionProblem, t, x):
    """D_y(t, x) = 2 rho (gamma + alpha) v (v_x x + v)."""
    x = np.asarray(x, dtype=float)
    v = problem.v_fn(t, x)
    vx = problem.v_x_fn(t, x)
    k = 2.0 * problem.rho * (problem.gamma_trader + problem.alpha_market)
    return k * v * (vx * x + v)


def pde_drift(problem: PredictableOptionProblem, t, x):
    """First-order coefficient (r - D_y) x of the pricing PDE."""
    x = np.asarray(x, dtype=float)
    return (problem.r_fn(t, x) - dividend_yield(problem, t, x)) * x


@dataclass(frozen=True)
class PdeGrid:
    x_min: float
    x_max: float
    n_x: int
    n_t: int
    theta: float = 0.5
    rannacher_steps: int = 2

    def __post_init__(self):
        if not self.x_min > 0:
            raise ConfigError(f"x_min must be > 0, got {self.x_min!r}", "grid.x_min")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min", "grid.x_max")
        if self.n_x < 3:
            raise ConfigError(f"n_x must be >= 3, got {self.n_x!r}", "grid.n_x")
        if self.n_t < 1:
            raise ConfigError(f"n_t must be >= 1, got {self.n_t!r}", "grid.n_t")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta!r}", "grid.theta")


def default_grid(
    problem: PredictableOptionProblem, n_x: int = 400, n_t: int = 400, theta: float = 0.5
) -> PdeGrid:
    """Six-sigma log truncation around the spot, sigma from v at (0, spot)."""
    vol = float(problem.v_fn(0.0, problem.spot))
    width = 6.0 * vol * math.sqrt(problem.maturity)
    return PdeGrid(problem.spot * math.exp(-width), problem.spot * math.exp(width), n_x, n_t, theta)


@dataclass
class PriceSurface:
    """C(t, x); row 0 is t = 0, the last row is maturity."""

    t: np.ndarray
    x: np.ndarray
    values: np.ndarray

    def price_at(self, x: float, t_index: int = 0) -> float:
        row = self.values[t_index]
        i = np.searchsorted(self.x, x)
        if i < self.x.size and self.x[i] == x:
            return float(row[i])
        if not self.x[0] <= x <= self.x[-1]:
            raise DomainError(f"x={x!r} outside the grid [{self.x[0]}, {self.x[-1]}]")
        return float(CubicSpline(self.x, row)(x))

    def rows(self):
        for i, t in enumerate(self.t):
            for j, x in enumerate(self.x):
                yield {"t": float(t), "x": float(x), "C": float(self.values[i, j])}


def _space_nodes(problem: PredictableOptionProblem, grid: PdeGrid) -> np.ndarray:
    """Uniform nodes with one exactly at the strike (lower end shifted by < h/2)."""
    h = (grid.x_max - grid.x_min) / (grid.n_x - 1)
    k = problem.strike
    if problem.kind == "custom":
        return grid.x_min + h * np.arange(grid.n_x)
    j = int(round((k - grid.x_min) / h))
    if not 1 <= j <= grid.n_x - 2:
        raise ConfigError(
            f"cannot place the strike {k!r} on an interior node of "
            f"[{grid.x_min}, {grid.x_max}] with n_x={grid.n_x}",
            "grid",
        )
    x0 = k - j * h
    if not x0 > 0:
        raise ConfigError(f"grid too coarse: shifting x_min to hit the strike gives {x0!r} <= 0", "grid")
    x = x0 + h * np.arange(grid.n_x)
    x[j] = k
    return x


def _lower_value(problem: PredictableOptionProblem, t: float, x0: float) -> float:
    tau = problem.maturity - t
    r = float(problem.r_fn(t, x0))
    if problem.kind == "call":
        return 0.0
    if problem.kind == "put":
        q = float(dividend_yield(problem, t, x0))
        return problem.strike * math.exp(-r * tau) - x0 * math.exp(-q * tau)
    return float(problem.terminal_payoff(x0)) * math.exp(-r * tau)


def _operator(problem, t, x, h):
    """Sub, main and super diagonals of the spatial operator at every node."""
    v = problem.v_fn(t, x)
    a = 0.5 * (v * x) ** 2 / (h * h)
    b = pde_drift(problem, t, x) / (2.0 * h)
    r = problem.r_fn(t, x)
    lo = np.broadcast_to(a - b, x.shape)
    mid = np.broadcast_to(-2.0 * a - r, x.shape)
    up = np.broadcast_to(a + b, x.shape)
    return lo, mid, up


def _apply(lo, mid, up, c):
    out = mid * c
    out[1:] += lo[1:] * c[:-1]
    out[:-1] += up[:-1] * c[1:]
    return out


def solve_pde(problem: PredictableOptionProblem, grid: PdeGrid) -> PriceSurface:
    """Backward theta-scheme from the terminal payoff.

    The first time step is replaced by ``rannacher_steps`` fully implicit
    sub-steps to damp the payoff kink; with ``theta = 1`` the scheme is fully
    implicit throughout.

    Raises:
        ConfigError: the strike cannot sit on an interior node.
        NumericalError: a tridiagonal solve fails or produces non-finite values.
    """
    x = _space_nodes(problem, grid)
    h = x[1] - x[0]
    n = x.size
    T = problem.maturity
    t_nodes = np.linspace(0.0, T, grid.n_t + 1)
    values = np.empty((grid.n_t + 1, n))
    c = problem.terminal_payoff(x).astype(float)
    values[-1] = c

    def advance(c_next, t_next, t_now, theta):
        dt = t_next - t_now
        lo_e, mid_e, up_e = _operator(problem, t_next, x, h)
        rhs_full = c_next + (1.0 - theta) * dt * _apply(lo_e, mid_e, up_e, c_next)
        lo, mid, up = _operator(problem, t_now, x, h)
        # unknowns are nodes 1..n-2; node n-1 follows by linearity
        sub = -theta * dt * lo[1 : n - 1].copy()
        diag = 1.0 - theta * dt * mid[1 : n - 1].copy()
        sup = -theta * dt * up[1 : n - 1].copy()
        rhs = rhs_full[1 : n - 1].copy()
        g = _lower_value(problem, t_now, x[0])
        rhs[0] -= sub[0] * g
        # C_{n-1} = 2 C_{n-2} - C_{n-3}
        sub[-1] -= sup[-1]
        diag[-1] += 2.0 * sup[-1]
        m = n - 2
        ab = np.zeros((3, m))
        ab[0, 1:] = sup[:-1]
        ab[1] = diag
        ab[2, :-1] = sub[1:]
        inner = linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
        out = np.empty(n)
        out[0] = g
        out[1 : n - 1] = inner
        out[-1] = 2.0 * inner[-1] - inner[-2]
        return out

    for step in range(grid.n_t, 0, -1):
        t_next, t_now = t_nodes[step], t_nodes[step - 1]
        try:
            if step == grid.n_t and grid.rannacher_steps > 0 and grid.theta < 1.0:
                sub_t = np.linspace(t_next, t_now, grid.rannacher_steps + 1)
                for a, b in zip(sub_t[:-1], sub_t[1:]):
                    c = advance(c, a, b, 1.0)
            else:
                c = advance(c, t_next, t_now, grid.theta)
        except (linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"linear solve failed at time step {step}: {exc}") from exc
        if not np.all(np.isfinite(c)):
            raise NumericalError(f"non-finite prices at time step {step}")
        values[step - 1] = c
    return PriceSurface(t_nodes, x, values)


def bs_closed_form(spot, strike, rate, yield_q, vol, maturity, kind: str = "call") -> float:
    """Black-Scholes value with continuous yield ``yield_q``."""
    if not vol > 0 or not maturity > 0:
        raise DomainError("vol and maturity must be positive")
    sq = vol * math.sqrt(maturity)
    d1 = (math.log(spot / strike) + (rate - yield_q + 0.5 * vol * vol) * maturity) / sq
    d2 = d1 - sq
    fwd = spot * math.exp(-yield_q * maturity)
    disc = strike * math.exp(-rate * maturity)
    if kind == "call":
        return fwd * norm.cdf(d1) - disc * norm.cdf(d2)
    if kind == "put":
        return disc * norm.cdf(-d2) - fwd * norm.cdf(-d1)
    raise DomainError(f"kind must be 'call' or 'put', got {kind!r}")


@dataclass
class ReplicationWeights:
    """Stock holding a = C_x and bond value b*beta = C - a*x on interior nodes."""

    x: np.ndarray
    stock: np.ndarray
    bond_value: np.ndarray


def replication_weights(
    problem: PredictableOptionProblem, grid: PdeGrid, surface: PriceSurface, t_index: int = 0
) -> ReplicationWeights:
    x = surface.x
    c = surface.values[t_index]
    a = (c[2:] - c[:-2]) / (x[2:] - x[:-2])
    xi = x[1:-1]
    return ReplicationWeights(xi, a, c[1:-1] - a * xi)


@dataclass
class McPrice:
    price: float
    se: float
    n_diverged: int = 0


def mc_price_predictable(
    problem: PredictableOptionProblem, grid: PathGrid, n_paths: int, seed: int
) -> McPrice:
    """Monte Carlo price under dX = (r - D_y) X dt + v X dB with discounting.

    Steps are log-Euler, exact for constant coefficients.  Paths that go
    non-finite are dropped and counted.
    """
    dt = grid.dt
    times = grid.times
    k = grid.steps

    def block(i, sl):
        m = sl.stop - sl.start
        z = stream(seed, 1, i).standard_normal((m, k)) * math.sqrt(dt)
        x = np.full(m, float(problem.spot))
        log_disc = np.zeros(m)
        with np.errstate(all="ignore"):
            for j in range(k):
                t = times[j]
                v = problem.v_fn(t, x)
                r = problem.r_fn(t, x)
                q = dividend_yield(problem, t, x)
                log_disc -= r * dt
                x = x * np.exp((r - q - 0.5 * v * v) * dt + v * z[:, j])
            return np.exp(log_disc) * problem.terminal_payoff(x)

    pv = np.concatenate(map_ordered(block, blocks(n_paths)))
    ok = np.isfinite(pv)
    good = pv[ok]
    se = float(good.std(ddof=1) / math.sqrt(good.size)) if good.size > 1 else 0.0
    return McPrice(float(good.mean()), se, int((~ok).sum()))
