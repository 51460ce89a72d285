"""Integer-order Bessel functions J_n, I_n and the handful of zeros we need.

J_n is summed from its power series for x <= 12 and obtained by Miller's
backward recurrence (normalised with J_0 + 2 sum J_2k = 1) beyond that.
I_n has no cancellation in its series, so the series is used everywhere.
All functions accept scalars or numpy arrays.
"""

from __future__ import annotations

from functools import lru_cache
import math

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "X_MAX",
    "MAX_ORDER",
    "bessel_j",
    "bessel_j_deriv",
    "bessel_i",
    "bessel_i_deriv",
    "bessel_i_ratio",
    "bessel_zero",
    "jn_zeros",
    "jnp_zeros",
    "J01",
    "J11",
    "J11_PRIME",
    "J21",
]

X_MAX = 100.0
MAX_ORDER = 30
SERIES_SWITCH = 12.0
_SERIES_TERMS = 60


def _check_order(nu, max_order=MAX_ORDER):
    if int(nu) != nu or nu < 0 or nu > max_order:
        raise ValueError(f"order must be an integer in [0, {max_order}], got {nu}")
    return int(nu)


def _check_range(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0) or np.any(x > X_MAX):
        raise ValueError(f"argument outside working range [0, {X_MAX}]")
    return x


def _series(nu, x, sign):
    """sum_k sign^k (x/2)^(2k+nu) / (k! (k+nu)!)"""
    # extended precision trims the cancellation loss near the switchover
    half = 0.5 * np.asarray(x, dtype=np.longdouble)
    term = half**nu / math.factorial(nu)
    total = term.copy()
    q = sign * half * half
    for k in range(1, _SERIES_TERMS + 200):
        term = term * q / (k * (k + nu))
        total = total + term
        if k >= _SERIES_TERMS and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total.astype(float)


def _series_scalar(nu, x, sign):
    half = np.longdouble(0.5) * np.longdouble(x)
    term = half**nu / np.longdouble(math.factorial(nu))
    total = term
    mag = abs(term)
    q = sign * half * half
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + nu))
        total += term
        mag += abs(term)
        if k > half and abs(term) <= 1e-19 * mag:
            return float(total)


def _miller(nu, x):
    """J_nu(x) for x > 0 by downward recurrence, one x at a time."""
    out = np.empty_like(x)
    for idx, xv in np.ndenumerate(x):
        start = 2 * ((int(xv) + nu + 40 + int(6.0 * xv ** (1.0 / 3.0))) // 2)
        j_next, j_cur = 0.0, 1e-300
        norm = 0.0
        want = 0.0
        for k in range(start, 0, -1):
            j_prev = 2.0 * k / xv * j_cur - j_next
            j_next, j_cur = j_cur, j_prev
            # j_cur now holds the unnormalised J_{k-1}
            if k - 1 == nu:
                want = j_cur
            if (k - 1) % 2 == 0 and k - 1 > 0:
                norm += 2.0 * j_cur
            if abs(j_cur) > 1e250:
                j_cur *= 1e-250
                j_next *= 1e-250
                norm *= 1e-250
                want *= 1e-250
        norm += j_cur
        out[idx] = want / norm
    return out


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x) for integer nu >= 0."""
    nu = _check_order(nu)
    x = _check_range(x)
    if x.ndim == 0:
        xv = float(x)
        if xv <= SERIES_SWITCH:
            return _series_scalar(nu, xv, -1)
        return float(_miller(nu, np.array([xv]))[0])
    out = np.empty_like(x)
    small = x <= SERIES_SWITCH
    if np.any(small):
        out[small] = _series(nu, x[small], -1.0)
    if np.any(~small):
        out[~small] = _miller(nu, x[~small])
    return out


def bessel_j_deriv(nu, x):
    """J_nu'(x) from the standard recurrences.

    J_0' = -J_1 and J_nu' = J_{nu-1} - nu J_nu / x for nu >= 1, so x must be
    strictly positive for nu >= 1.
    """
    nu = _check_order(nu)
    x = _check_range(x)
    if nu == 0:
        return -bessel_j(1, x)
    if np.any(x <= 0):
        raise ValueError("J_nu' needs x > 0 for nu >= 1")
    return bessel_j(nu - 1, x) - nu * bessel_j(nu, x) / x


def bessel_i(nu, x):
    """Modified Bessel function I_nu(x), nonnegative x, from the power series."""
    nu = _check_order(nu)
    x = _check_range(x)
    if x.ndim == 0:
        return _series_scalar(nu, float(x), 1)
    return _series(nu, x, 1.0)


def bessel_i_deriv(nu, x):
    """I_0' = I_1 and I_nu' = I_{nu-1} - nu I_nu / x."""
    nu = _check_order(nu)
    x = _check_range(x)
    if nu == 0:
        return bessel_i(1, x)
    if np.any(x <= 0):
        raise ValueError("I_nu' needs x > 0 for nu >= 1")
    return bessel_i(nu - 1, x) - nu * bessel_i(nu, x) / x


def bessel_i_ratio(nu, x):
    """I_{nu+1}(x) / I_nu(x) for x > 0 via the Gauss continued fraction.

    Stays finite for arbitrarily large x, which the negative Robin branch
    with very negative parameters needs.
    """
    nu = _check_order(nu)
    if x <= 0:
        raise ValueError("ratio needs x > 0")
    # Lentz evaluation of 1 / (2(nu+1)/x + 1 / (2(nu+2)/x + ...))
    tiny = 1e-300
    f = tiny
    c, d = f, 0.0
    for k in range(1, 100000):
        b = 2.0 * (nu + k) / x
        d = b + d
        d = tiny if d == 0.0 else d
        c = b + 1.0 / c
        c = tiny if c == 0.0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return f


def _bracket_roots(func, lo, hi, count, step):
    roots = []
    a, fa = lo, func(lo)
    while len(roots) < count:
        b = a + step
        if b > hi:
            raise RuntimeError("root scan exceeded the working range")
        fb = func(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(func, a, b, xtol=1e-15, rtol=1e-15, maxiter=200))
        a, fa = b, fb
    return roots


@lru_cache(maxsize=None)
def jn_zeros(nu: int, count: int) -> tuple[float, ...]:
    """First `count` positive zeros of J_nu."""
    nu = _check_order(nu)
    lo = max(nu, 1e-3) if nu > 0 else 1e-3
    # J_nu has no zeros below nu
    return tuple(_bracket_roots(lambda t: bessel_j(nu, t), lo, X_MAX, count, 0.05))


@lru_cache(maxsize=None)
def jnp_zeros(nu: int, count: int) -> tuple[float, ...]:
    """First `count` positive zeros of J_nu' (x = 0 is never included)."""
    nu = _check_order(nu)
    lo = 0.5 * nu if nu > 1 else 1e-3
    return tuple(_bracket_roots(lambda t: bessel_j_deriv(nu, t), lo, X_MAX, count, 0.05))


_ZERO_KINDS = {
    "j01": lambda: jn_zeros(0, 1)[0],
    "j11": lambda: jn_zeros(1, 1)[0],
    "j11_prime": lambda: jnp_zeros(1, 1)[0],
    "j21": lambda: jn_zeros(2, 1)[0],
}


def bessel_zero(kind: str) -> float:
    """One of the named zeros ``j01``, ``j11``, ``j11_prime``, ``j21``."""
    try:
        return _ZERO_KINDS[kind]()
    except KeyError:
        raise ValueError(f"unknown zero {kind!r}; choose from {sorted(_ZERO_KINDS)}") from None


J01 = bessel_zero("j01")
J11 = bessel_zero("j11")
J11_PRIME = bessel_zero("j11_prime")
J21 = bessel_zero("j21")

if not (J11_PRIME < J01 < J11 < J21):
    raise RuntimeError("Bessel zero interlacing check failed at import")
