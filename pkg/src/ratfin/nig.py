"""Normal-Inverse-Gaussian distribution NIG(mu, alpha, beta, delta).

Density, characteristic function, exponential moments, closed-form moments,
an exact mixture sampler and a method-of-moments fit.  All functions are pure;
the sampler is deterministic given its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from ratfin.errors import DomainError, FitInfeasibleError, MomentNonexistenceError
from ratfin.rng import stream
from ratfin.special import k1e

__all__ = [
    "NigParams",
    "NigMoments",
    "nig_pdf",
    "nig_logpdf",
    "nig_cdf",
    "nig_cf",
    "nig_log_exp_moment",
    "nig_exp_moment",
    "nig_moments",
    "nig_sample",
    "inverse_gaussian_sample",
    "nig_fit_moments",
    "nig_gaussian_limit_params",
    "sample_moments",
]

_SAMPLE_CHUNK = 1_000_000


@dataclass(frozen=True)
class NigParams:
    mu: float
    alpha: float
    beta: float
    delta: float

    def __post_init__(self):
        vals = (self.mu, self.alpha, self.beta, self.delta)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"NIG parameters must be finite, got {vals}")
        if not self.alpha > 0:
            raise DomainError(f"NIG requires alpha > 0, got alpha={self.alpha!r}")
        if not self.delta > 0:
            raise DomainError(f"NIG requires delta > 0, got delta={self.delta!r}")
        if not self.alpha**2 > self.beta**2:
            raise DomainError(
                f"NIG requires alpha^2 > beta^2, got alpha={self.alpha!r}, beta={self.beta!r}"
            )

    @property
    def gamma(self) -> float:
        """sqrt(alpha^2 - beta^2)."""
        return math.sqrt(self.alpha**2 - self.beta**2)

    def shifted(self, dmu: float) -> "NigParams":
        return NigParams(self.mu + dmu, self.alpha, self.beta, self.delta)


@dataclass(frozen=True)
class NigMoments:
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float


def nig_logpdf(p: NigParams, x):
    x = np.asarray(x, dtype=float)
    y = x - p.mu
    r = np.hypot(p.delta, y)
    z = p.alpha * r
    out = (
        math.log(p.alpha * p.delta / math.pi)
        + np.log(k1e(z))
        - z
        - np.log(r)
        + p.delta * p.gamma
        + p.beta * y
    )
    return float(out) if out.ndim == 0 else out


def nig_pdf(p: NigParams, x):
    """Density at ``x``; evaluated in log space so large alpha*delta is safe."""
    return np.exp(nig_logpdf(p, x))


def nig_cdf(p: NigParams, x):
    """Distribution function by adaptive quadrature of the density.

    Points are sorted and integrated segment by segment from the location,
    so the cost is one ``quad`` call per distinct point.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    order = np.argsort(flat)
    xs = flat[order]
    f = lambda u: nig_pdf(p, u)
    scale = math.sqrt(nig_moments(p).variance)
    width = min(p.delta, scale)

    def piece(a, b):
        if a == b:
            return 0.0
        pts = [p.mu] if a < p.mu < b else None
        val, _ = integrate.quad(f, a, b, points=pts, limit=400, epsabs=1e-13, epsrel=1e-11)
        return val

    left_mass, _ = integrate.quad(f, -np.inf, p.mu - width, limit=400, epsabs=1e-13)
    centre = p.mu - width
    out = np.empty_like(xs)
    # walk outward from the anchor in both directions
    i0 = int(np.searchsorted(xs, centre))
    acc, prev = left_mass, centre
    for i in range(i0, xs.size):
        acc += piece(prev, xs[i])
        prev = xs[i]
        out[i] = acc
    acc, prev = left_mass, centre
    for i in range(i0 - 1, -1, -1):
        acc -= piece(xs[i], prev)
        prev = xs[i]
        out[i] = acc
    res = np.empty_like(flat)
    res[order] = np.clip(out, 0.0, 1.0)
    res = res.reshape(x.shape)
    return float(res) if res.ndim == 0 else res


def nig_cf(p: NigParams, t):
    """Characteristic function E[exp(itX)]."""
    t = np.asarray(t, dtype=float)
    root = np.sqrt(p.alpha**2 - (p.beta + 1j * t) ** 2)
    out = np.exp(1j * p.mu * t + p.delta * (p.gamma - root))
    return complex(out) if out.ndim == 0 else out


def nig_log_exp_moment(p: NigParams, s: float) -> float:
    """log E[exp(sX)] = mu*s + delta*(gamma - sqrt(alpha^2 - (beta+s)^2))."""
    rad = p.alpha**2 - (p.beta + s) ** 2
    if not rad > 0:
        raise MomentNonexistenceError(s, p.alpha, p.beta)
    # gamma - sqrt(rad) rewritten as a quotient so large alpha does not cancel
    return p.mu * s + p.delta * s * (2.0 * p.beta + s) / (p.gamma + math.sqrt(rad))


def nig_exp_moment(p: NigParams, s: float) -> float:
    return math.exp(nig_log_exp_moment(p, s))


def nig_moments(p: NigParams) -> NigMoments:
    g = p.gamma
    return NigMoments(
        mean=p.mu + p.delta * p.beta / g,
        variance=p.delta * p.alpha**2 / g**3,
        skewness=3.0 * p.beta / (p.alpha * math.sqrt(p.delta * g)),
        excess_kurtosis=3.0 * (1.0 + 4.0 * p.beta**2 / p.alpha**2) / (p.delta * g),
    )


def inverse_gaussian_sample(mean: float, shape: float, n: int, rng: np.random.Generator):
    """Michael-Schucany-Haas transform: exact, one chi-square and one uniform per draw."""
    nu = rng.standard_normal(n)
    y = nu * nu
    my = mean * y
    x = mean + mean * my / (2.0 * shape) - (mean / (2.0 * shape)) * np.sqrt(
        4.0 * shape * my + my * my
    )
    u = rng.random(n)
    return np.where(u <= mean / (mean + x), x, mean * mean / x)


def nig_sample(p: NigParams, n: int, seed: int) -> np.ndarray:
    """``n`` draws via the normal variance-mean mixture X = mu + beta*W + sqrt(W)*Z."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed, 0)
    ig_mean = p.delta / p.gamma
    ig_shape = p.delta**2
    out = np.empty(n)
    for start in range(0, n, _SAMPLE_CHUNK):
        m = min(_SAMPLE_CHUNK, n - start)
        w = inverse_gaussian_sample(ig_mean, ig_shape, m, rng)
        z = rng.standard_normal(m)
        out[start : start + m] = p.mu + p.beta * w + np.sqrt(w) * z
    return out


def sample_moments(sample: Sequence[float]) -> NigMoments:
    """Plug-in (population-normalised) mean, variance, skewness, excess kurtosis."""
    x = np.asarray(sample, dtype=float)
    m = x.mean()
    d = x - m
    m2 = np.mean(d * d)
    if not m2 > 0:
        return NigMoments(float(m), float(m2), float("nan"), float("nan"))
    m3 = np.mean(d**3)
    m4 = np.mean(d**4)
    return NigMoments(float(m), float(m2), float(m3 / m2**1.5), float(m4 / m2**2 - 3.0))


def nig_fit_moments(sample: Sequence[float]) -> NigParams:
    """Method-of-moments NIG fit.

    With zeta = delta*gamma and rho = beta/alpha, skewness^2 = 9 rho^2 / zeta and
    excess kurtosis = 3 (1 + 4 rho^2) / zeta, so rho^2 = S^2 / (3K - 4S^2).
    rho^2 < 1 is the feasibility condition 3K > 5S^2; the variance then fixes
    gamma and the mean fixes mu.

    Raises:
        FitInfeasibleError: fewer than 4 points, zero variance, non-positive
            excess kurtosis, or 3*K <= 5*S^2.
    """
    x = np.asarray(sample, dtype=float)
    if x.size < 4:
        raise FitInfeasibleError(f"need at least 4 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise FitInfeasibleError("sample contains non-finite values")
    mom = sample_moments(x)
    if not mom.variance > 0:
        raise FitInfeasibleError("constraint variance > 0 violated (constant sample)")
    S, K = mom.skewness, mom.excess_kurtosis
    if not K > 0:
        raise FitInfeasibleError(f"constraint excess_kurtosis > 0 violated (got {K:.6g})")
    if not 3.0 * K > 5.0 * S * S:
        raise FitInfeasibleError(
            f"constraint 3*excess_kurtosis > 5*skewness^2 violated "
            f"(3K = {3 * K:.6g}, 5S^2 = {5 * S * S:.6g})"
        )
    rho2 = S * S / (3.0 * K - 4.0 * S * S)
    rho = math.copysign(math.sqrt(rho2), S)
    zeta = 3.0 * (1.0 + 4.0 * rho2) / K
    gamma = math.sqrt(zeta / (mom.variance * (1.0 - rho2)))
    alpha = gamma / math.sqrt(1.0 - rho2)
    beta = rho * alpha
    delta = zeta / gamma
    mu = mom.mean - delta * beta / gamma
    return NigParams(mu, alpha, beta, delta)


def nig_gaussian_limit_params(sigma2: float, mu: float, alpha: float) -> NigParams:
    """(mu, alpha, 0, sigma2*alpha): variance sigma2, excess kurtosis 3/(sigma2*alpha^2)."""
    if not sigma2 > 0 or not alpha > 0:
        raise DomainError("sigma2 and alpha must be positive")
    return NigParams(mu, alpha, 0.0, sigma2 * alpha)
