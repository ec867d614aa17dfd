"""Modified Bessel function of the second kind, order one.

Three regimes, all returning the exponentially scaled value
``k1e(x) = exp(x) * K1(x)`` so that callers can work in log space:

* ``x <= 2``: the ascending series (Abramowitz & Stegun 9.6.11 with n = 1);
* ``2 < x <= 30``: Steed's continued fraction for K0/K1 (Temme's method);
* ``x > 30``: the Hankel asymptotic expansion.

Relative error is below 1e-13 throughout (checked against mpmath in the tests).
"""

from __future__ import annotations

import math

import numpy as np

_EULER_GAMMA = 0.57721566490153286061
_SERIES_MAX = 2.0
_ASYMPTOTIC_MIN = 30.0
_EPS = 1e-16


def _k1_series(x: np.ndarray) -> np.ndarray:
    """K1 by the ascending series; accurate for 0 < x <= 2."""
    y = 0.25 * x * x
    # term_k = y^k / (k! (k+1)!); I1 = (x/2) * sum term_k
    term = np.ones_like(x)
    psi_k1 = np.full_like(x, -_EULER_GAMMA)  # psi(k+1)
    psi_k2 = np.full_like(x, 1.0 - _EULER_GAMMA)  # psi(k+2)
    i_sum = term.copy()
    psi_sum = term * (psi_k1 + psi_k2)
    for k in range(1, 40):
        term = term * y / (k * (k + 1))
        psi_k1 = psi_k1 + 1.0 / k
        psi_k2 = psi_k2 + 1.0 / (k + 1)
        i_sum = i_sum + term
        psi_sum = psi_sum + term * (psi_k1 + psi_k2)
        if np.all(term < _EPS * i_sum):
            break
    i1 = 0.5 * x * i_sum
    return 1.0 / x + np.log(0.5 * x) * i1 - 0.25 * x * psi_sum


def _k1e_steed(x: np.ndarray) -> np.ndarray:
    """exp(x) K1(x) by Steed's CF2 (order mu = 0, then the K1 recurrence)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    done = np.zeros(x.shape, dtype=bool)
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = np.where(done, h, h + delh)
        dels = q * delh
        s = np.where(done, s, s + dels)
        done |= np.abs(dels) < _EPS * np.abs(s)
        if done.all():
            break
    h = a1 * h
    k0e = np.sqrt(math.pi / (2.0 * x)) / s
    return k0e * (x + 0.5 - h) / x


def _k1e_asymptotic(x: np.ndarray) -> np.ndarray:
    mu = 4.0
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, 30):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
        if np.all(np.abs(term) < _EPS * np.abs(total)):
            break
    return np.sqrt(math.pi / (2.0 * x)) * total


def k1e(x):
    """Exponentially scaled ``exp(x) * K1(x)`` for x > 0 (array or scalar)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(~(arr > 0)):
        raise ValueError("K1 is defined for x > 0 only")
    out = np.empty_like(arr)
    lo = arr <= _SERIES_MAX
    hi = arr > _ASYMPTOTIC_MIN
    mid = ~lo & ~hi
    if lo.any():
        out[lo] = _k1_series(arr[lo]) * np.exp(arr[lo])
    if mid.any():
        out[mid] = _k1e_steed(arr[mid])
    if hi.any():
        out[hi] = _k1e_asymptotic(arr[hi])
    return float(out[0]) if scalar else out


def k1(x):
    """K1(x) for x > 0; underflows to 0 beyond x ~ 700."""
    arr = np.asarray(x, dtype=float)
    return k1e(arr) * np.exp(-arr)


def log_k1(x):
    """log K1(x) without underflow."""
    arr = np.asarray(x, dtype=float)
    return np.log(k1e(arr)) - arr
