"""One-factor HJM forward-rate model with predictable forward rates.

Under the physical measure

    df(t,T) = (m(t,T) + 2 alpha^2 v(t,T)^2) dt + v(t,T) dB(t)

and absence of arbitrage requires the market price of risk

    theta(t) = (m + 2 alpha^2 v^2 - v * int_t^T v(t,u) du) / v

to be the same for every maturity T.  Under the risk-neutral measure alpha
drops out and the forward drift is v(t,T) * int_t^T v(t,u) du.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ratfin.errors import DomainError
from ratfin.rng import blocks, map_ordered, stream
from ratfin.stratonovich import PathGrid

__all__ = [
    "ForwardCurveModel",
    "ArbitrageCheck",
    "ForwardEnsemble",
    "BondEstimate",
    "flat_model",
    "ho_lee_model",
    "simpson",
    "vol_integral",
    "market_price_of_risk",
    "check_no_arbitrage",
    "simulate_risk_neutral",
    "bond_price_initial",
    "bond_price_mc",
    "discounted_bond_means",
]

DEFAULT_PANELS = 64


@dataclass(frozen=True)
class ForwardCurveModel:
    """Initial curve on a uniform maturity grid plus drift/volatility surfaces.

    ``m_fn(t, T)`` and ``v_fn(t, T)`` must broadcast over array T.  ``f0`` is
    linearly interpolated between ``maturities``.
    """

    maturities: np.ndarray
    f0: np.ndarray
    m_fn: Callable
    v_fn: Callable
    alpha: float = 0.0

    def __post_init__(self):
        mats = np.asarray(self.maturities, dtype=float)
        f0 = np.asarray(self.f0, dtype=float)
        if mats.ndim != 1 or mats.shape != f0.shape or mats.size < 2:
            raise DomainError("maturities and f0 must be 1-d arrays of equal length >= 2")
        if mats[0] != 0.0:
            raise DomainError("maturity grid must start at 0")
        steps = np.diff(mats)
        if not np.all(steps > 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise DomainError("maturity grid must be uniform and increasing")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        object.__setattr__(self, "maturities", mats)
        object.__setattr__(self, "f0", f0)

    @property
    def horizon(self) -> float:
        return float(self.maturities[-1])

    def f0_at(self, T):
        T = np.asarray(T, dtype=float)
        if np.any(T < 0) or np.any(T > self.horizon * (1 + 1e-12)):
            raise DomainError(f"maturity outside [0, {self.horizon}]")
        return np.interp(T, self.maturities, self.f0)

    def physical_drift(self, t, T):
        """m(t,T) + 2 alpha^2 v(t,T)^2."""
        v = self.v_fn(t, T)
        return self.m_fn(t, T) + 2.0 * self.alpha**2 * v * v


def _grid(horizon: float, n: int) -> np.ndarray:
    return np.linspace(0.0, horizon, n + 1)


def flat_model(rate: float, vol: float, horizon: float, n: int = 40, alpha: float = 0.0,
               m_fn: Callable = None) -> ForwardCurveModel:
    """Flat initial curve, constant volatility; drift defaults to zero."""
    mats = _grid(horizon, n)
    return ForwardCurveModel(
        mats,
        np.full(mats.size, float(rate)),
        m_fn or (lambda t, T: 0.0 * np.asarray(T, dtype=float)),
        lambda t, T: vol + 0.0 * np.asarray(T, dtype=float),
        alpha,
    )


def ho_lee_model(v0: float, theta0: float, alpha: float, rate: float, horizon: float,
                 n: int = 40) -> ForwardCurveModel:
    """Constant volatility with m(t,T) = theta0 v0 - 2 alpha^2 v0^2 + v0^2 (T - t).

    This drift makes the market price of risk equal theta0 at every maturity.
    """
    def m_fn(t, T):
        return theta0 * v0 - 2.0 * alpha**2 * v0**2 + v0**2 * (np.asarray(T, dtype=float) - t)

    return flat_model(rate, v0, horizon, n, alpha, m_fn)


def simpson(values: np.ndarray, a, b, axis: int = -1) -> np.ndarray:
    """Composite Simpson rule for samples on an even number of uniform panels."""
    n = values.shape[axis] - 1
    if n < 2 or n % 2:
        raise ValueError("Simpson needs an even number of panels")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = (np.asarray(b, dtype=float) - np.asarray(a, dtype=float)) / n
    return h * np.tensordot(values, w, axes=([axis], [0])) / 3.0


def vol_integral(model: ForwardCurveModel, t: float, T, panels: int = DEFAULT_PANELS):
    """int_t^T v(t,u) du for scalar t and scalar or array T (Simpson)."""
    T = np.asarray(T, dtype=float)
    s = np.linspace(0.0, 1.0, panels + 1)
    u = t + np.multiply.outer(T - t, s)
    vals = np.broadcast_to(model.v_fn(t, u), u.shape)
    out = simpson(vals, t, T)
    return float(out) if out.ndim == 0 else out


def market_price_of_risk(model: ForwardCurveModel, t: float, T: float,
                         panels: int = DEFAULT_PANELS) -> float:
    if T < t:
        raise DomainError(f"maturity T={T!r} precedes t={t!r}")
    v = float(model.v_fn(t, T))
    if not v > 0:
        raise DomainError(f"volatility v(t,T) must be > 0, got {v!r} at t={t!r}, T={T!r}")
    drift = float(model.physical_drift(t, T))
    return (drift - v * vol_integral(model, t, T, panels)) / v


@dataclass
class ArbitrageCheck:
    arbitrage_free: bool
    spread: float
    spreads: np.ndarray  # per t

    def __bool__(self):
        return self.arbitrage_free


def check_no_arbitrage(model: ForwardCurveModel, t_grid: Sequence[float],
                       T_grid: Sequence[float], tol: float = 1e-8,
                       panels: int = DEFAULT_PANELS) -> ArbitrageCheck:
    """Largest maturity spread of theta(t, .) over t; arbitrage-free iff < tol."""
    spreads = []
    for t in t_grid:
        thetas = [market_price_of_risk(model, t, T, panels) for T in T_grid if T >= t]
        spreads.append(max(thetas) - min(thetas) if thetas else 0.0)
    spreads = np.asarray(spreads, dtype=float)
    worst = float(spreads.max()) if spreads.size else 0.0
    return ArbitrageCheck(worst < tol, worst, spreads)


def _rn_drift_table(model, times, mats, panels):
    """Risk-neutral drift v(t,T) int_t^T v du for each step time and maturity."""
    table = np.zeros((times.size, mats.size))
    for n, t in enumerate(times):
        live = mats > t
        if live.any():
            table[n, live] = model.v_fn(t, mats[live]) * vol_integral(model, t, mats[live], panels)
    return table


def _vol_table(model, times, mats):
    table = np.zeros((times.size, mats.size))
    for n, t in enumerate(times):
        live = mats > t
        if live.any():
            table[n, live] = model.v_fn(t, mats[live])
    return table


@dataclass
class ForwardEnsemble:
    times: np.ndarray
    maturities: np.ndarray
    f: np.ndarray  # (n_paths, steps+1, n_maturities)
    diverged: np.ndarray

    def rows(self):
        for p in range(self.f.shape[0]):
            for i, t in enumerate(self.times):
                for j, T in enumerate(self.maturities):
                    yield {"path": p, "t": float(t), "T": float(T), "f": float(self.f[p, i, j])}


def _simulate(model, grid, mats, n_paths, seed, panels, observer):
    """Run Euler blocks; ``observer(m)`` returns (record(n, f), finish()) per block."""
    times = grid.times
    dt = grid.dt
    drift = _rn_drift_table(model, times[:-1], mats, panels) * dt
    vol = _vol_table(model, times[:-1], mats)
    f_start = model.f0_at(mats)

    def block(i, sl):
        m = sl.stop - sl.start
        db = stream(seed, 1, i).standard_normal((m, grid.steps)) * math.sqrt(dt)
        record, finish = observer(m)
        f = np.broadcast_to(f_start, (m, mats.size)).copy()
        record(0, f)
        with np.errstate(all="ignore"):
            for n in range(grid.steps):
                f = f + drift[n] + vol[n] * db[:, n : n + 1]
                record(n + 1, f)
        return finish()

    return map_ordered(block, blocks(n_paths))


def simulate_risk_neutral(model: ForwardCurveModel, grid: PathGrid, maturity_grid,
                          n_paths: int, seed: int,
                          panels: int = DEFAULT_PANELS) -> ForwardEnsemble:
    """Euler paths of f(t,T) under the risk-neutral measure.

    A maturity stops evolving once t reaches it.  ``model.alpha`` is not used,
    so outputs are identical across alpha for equal seeds.
    """
    mats = np.asarray(maturity_grid, dtype=float)

    def observer(m):
        hist = np.empty((m, grid.steps + 1, mats.size))

        def record(n, f):
            hist[:, n] = f

        return record, lambda: hist

    f = np.concatenate(_simulate(model, grid, mats, n_paths, seed, panels, observer))
    diverged = ~np.all(np.isfinite(f), axis=(1, 2))
    return ForwardEnsemble(grid.times, mats, f, diverged)


def bond_price_initial(model: ForwardCurveModel, T: float) -> float:
    """exp(-int_0^T f(0,u) du); exact for the piecewise-linear initial curve."""
    if T == 0:
        return 1.0
    knots = model.maturities[model.maturities < T]
    u = np.append(knots, T)
    return math.exp(-float(np.trapezoid(model.f0_at(u), u)))


@dataclass
class BondEstimate:
    price: float
    se: float
    n_diverged: int = 0


def _short_rate_grid(model, T, steps):
    grid = PathGrid(T, steps)
    if T > model.horizon * (1 + 1e-12):
        raise DomainError(f"maturity {T!r} beyond the model horizon {model.horizon!r}")
    return grid, grid.times


def bond_price_mc(model: ForwardCurveModel, T: float, steps: int, n_paths: int, seed: int,
                  panels: int = DEFAULT_PANELS) -> BondEstimate:
    """E^Q[exp(-int_0^T f(s,s) ds)] with forwards simulated on the time grid itself."""
    if T == 0:
        return BondEstimate(1.0, 0.0)
    grid, times = _short_rate_grid(model, T, steps)

    def observer(m):
        r = np.empty((m, grid.steps + 1))

        def record(n, f):
            r[:, n] = f[:, n]

        return record, lambda: np.exp(-np.trapezoid(r, dx=grid.dt, axis=1))

    vals = np.concatenate(_simulate(model, grid, times, n_paths, seed, panels, observer))
    ok = np.isfinite(vals)
    g = vals[ok]
    return BondEstimate(float(g.mean()), float(g.std(ddof=1) / math.sqrt(g.size)), int((~ok).sum()))


def discounted_bond_means(model: ForwardCurveModel, T: float, steps: int, n_paths: int,
                          seed: int, panels: int = DEFAULT_PANELS):
    """Mean and SE over paths of P(t_n, T) / beta(t_n) at every grid time.

    Under the risk-neutral measure these means should be flat in t.
    """
    grid, times = _short_rate_grid(model, T, steps)
    dt = grid.dt

    def observer(m):
        out = np.empty((m, grid.steps + 1))
        log_beta = np.zeros(m)
        prev_r = [None]

        def record(n, f):
            r = f[:, n]
            if n > 0:
                log_beta[:] += 0.5 * (r + prev_r[0]) * dt
            prev_r[0] = r.copy()
            tail = f[:, n:]
            bond = np.trapezoid(tail, dx=dt, axis=1) if tail.shape[1] > 1 else 0.0
            out[:, n] = np.exp(-bond - log_beta)

        return record, lambda: out

    vals = np.concatenate(_simulate(model, grid, times, n_paths, seed, panels, observer))
    return times, vals.mean(axis=0), vals.std(axis=0, ddof=1) / math.sqrt(vals.shape[0])
