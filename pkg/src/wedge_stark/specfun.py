"""Bessel functions of the first kind for real order, with zeros and maxima.

Evaluation uses the ascending power series where it is free of cancellation
and Steed's method otherwise: the continued fraction for J'/J, a normalized
downward recurrence to a low order, and the complex continued fraction for
(J' + iY')/(J + iY) fixed by the Wronskian.  Both paths are double precision
only; scipy/mpmath are used in the tests as independent references.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BesselZero",
    "bessel_j",
    "bessel_j_prime",
    "bessel_zero",
    "first_zero",
    "first_max",
]

_EPS = 1e-16
_FPMIN = 1e-300
_MAXIT = 100_000
_SCAN_STEP = 0.25


@dataclass(frozen=True)
class BesselZero:
    nu: float
    index: int
    value: float


def _check_domain(nu: float, x: float) -> None:
    if not (nu >= 0.0) or not math.isfinite(nu):
        raise ValueError(f"Bessel order must be finite and >= 0, got {nu!r}")
    if not (x >= 0.0) or not math.isfinite(x):
        raise ValueError(f"Bessel argument must be finite and >= 0, got {x!r}")


def _use_series(nu: float, x: float) -> bool:
    # ratio of the first two series terms; <= 1/2 keeps the alternating sum
    # within a factor 2 of its leading term
    return x < 2.0 or x * x <= 2.0 * (nu + 1.0)


def _series(nu: float, x: float) -> float:
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    log_pref = nu * math.log(0.5 * x) - math.lgamma(nu + 1.0)
    if log_pref < -745.0:
        return 0.0
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= q / (k * (nu + k))
        total += term
        if abs(term) <= _EPS * abs(total):
            break
    return math.exp(log_pref) * total


def _steed(nu: float, x: float) -> float:
    """J_nu(x) for x >= 2 by continued fractions and downward recurrence."""
    xi = 1.0 / x
    xi2 = 2.0 * xi
    w = xi2 / math.pi
    nl = max(0, int(nu - x + 1.5))
    mu = nu - nl

    # CF1: h -> J'_nu / J_nu; isign tracks the sign of J_nu
    isign = 1
    h = max(nu * xi, _FPMIN)
    b = xi2 * nu
    d = 0.0
    c = h
    for _ in range(_MAXIT):
        b += xi2
        d = b - d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b - 1.0 / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = c * d
        h *= delta
        if d < 0.0:
            isign = -isign
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"CF1 did not converge for nu={nu}, x={x}")

    # unnormalized downward recurrence from nu to mu, rescaled on growth
    rjl = float(isign)
    rjpl = h * rjl
    rjl1 = rjl
    rjp1 = rjpl
    fact = nu * xi
    for _ in range(nl):
        rjtemp = fact * rjl + rjpl
        fact -= xi
        rjpl = fact * rjtemp - rjl
        rjl = rjtemp
        if abs(rjl) > 1e200:
            rjl *= 1e-200
            rjpl *= 1e-200
            rjl1 *= 1e-200
            rjp1 *= 1e-200
    if rjl == 0.0:
        rjl = _EPS
    f = rjpl / rjl

    # CF2 (Steed / Temme): p + iq = (J'_mu + i Y'_mu) / (J_mu + i Y_mu)
    a = 0.25 - mu * mu
    p = -0.5 * xi
    q = 1.0
    br = 2.0 * x
    bi = 2.0
    fct = a * xi / (p * p + q * q)
    cr = br + q * fct
    ci = bi + p * fct
    den = br * br + bi * bi
    dr = br / den
    di = -bi / den
    dlr = cr * dr - ci * di
    dli = cr * di + ci * dr
    temp = p * dlr - q * dli
    q = p * dli + q * dlr
    p = temp
    for i in range(1, _MAXIT):
        a += 2 * i
        bi += 2.0
        dr = a * dr + br
        di = a * di + bi
        if abs(dr) + abs(di) < _FPMIN:
            dr = _FPMIN
        fct = a / (cr * cr + ci * ci)
        cr = br + cr * fct
        ci = bi - ci * fct
        if abs(cr) + abs(ci) < _FPMIN:
            cr = _FPMIN
        den = dr * dr + di * di
        dr /= den
        di /= -den
        dlr = cr * dr - ci * di
        dli = cr * di + ci * dr
        temp = p * dlr - q * dli
        q = p * dli + q * dlr
        p = temp
        if abs(dlr - 1.0) + abs(dli) < _EPS:
            break
    else:
        raise ArithmeticError(f"CF2 did not converge for nu={nu}, x={x}")

    gam = (p - f) / q
    rjmu = math.sqrt(w / ((p - f) * gam + q))
    rjmu = math.copysign(rjmu, rjl)
    return rjl1 * (rjmu / rjl)


def _jv(nu: float, x: float) -> float:
    _check_domain(nu, x)
    if _use_series(nu, x):
        return _series(nu, x)
    return _steed(nu, x)


def bessel_j(nu: float, x):
    """J_nu(x) for real nu >= 0 and x >= 0; ``x`` may be a scalar or array."""
    if np.ndim(x) == 0:
        return _jv(float(nu), float(x))
    arr = np.asarray(x, dtype=float)
    out = np.empty(arr.shape)
    flat_in = arr.ravel()
    flat_out = out.ravel()
    for i, xi in enumerate(flat_in):
        flat_out[i] = _jv(float(nu), float(xi))
    return out


def _jvp(nu: float, x: float) -> float:
    if x == 0.0:
        _check_domain(nu, x)
        if nu == 0.0 or nu > 1.0:
            return 0.0
        if nu == 1.0:
            return 0.5
        raise ValueError(f"J'_nu(0) is unbounded for 0 < nu < 1 (nu={nu})")
    return (nu / x) * _jv(nu, x) - _jv(nu + 1.0, x)


def bessel_j_prime(nu: float, x):
    """dJ_nu/dx from the recurrence J'_nu = (nu/x) J_nu - J_{nu+1}.

    Equivalent to J_{nu-1} - (nu/x) J_nu but needs no negative orders.
    """
    if np.ndim(x) == 0:
        return _jvp(float(nu), float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([_jvp(float(nu), float(v)) for v in arr.ravel()]).reshape(arr.shape)


def _jvpp(nu: float, x: float, j: float, jp: float) -> float:
    # Bessel's equation solved for J''
    return -jp / x - (1.0 - (nu / x) ** 2) * j


def _refine(fun, dfun, lo: float, hi: float) -> float:
    """Bisect a sign-changing bracket to machine width, then Newton-polish."""
    flo = fun(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = fun(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    root = 0.5 * (lo + hi)
    for _ in range(3):
        fr = fun(root)
        dfr = dfun(root)
        if dfr == 0.0:
            break
        step = fr / dfr
        cand = root - step
        # bracket may have collapsed to a single ulp; never leave it by more
        if not (lo - 4e-16 * hi <= cand <= hi + 4e-16 * hi):
            break
        if abs(fun(cand)) > abs(fr):
            break
        root = cand
    return root


def _scan_limit(nu: float, index: int) -> float:
    return nu + 10.0 * (1.0 + nu ** (1.0 / 3.0)) * index


def bessel_zero(nu: float, index: int = 1) -> BesselZero:
    """The ``index``-th positive zero of J_nu, for 0 < nu <= 100."""
    if not (0.0 < nu <= 100.0):
        raise ValueError(f"order must lie in (0, 100], got {nu!r}")
    if index < 1:
        raise ValueError(f"zero index must be >= 1, got {index!r}")
    nu = float(nu)
    fun = lambda t: _jv(nu, t)  # noqa: E731
    dfun = lambda t: _jvp(nu, t)  # noqa: E731
    limit = _scan_limit(nu, index)
    lo = nu
    flo = fun(lo)
    found = 0
    while lo < limit:
        hi = lo + _SCAN_STEP
        fhi = fun(hi)
        if (fhi > 0.0) != (flo > 0.0) or fhi == 0.0:
            found += 1
            if found == index:
                return BesselZero(nu, index, _refine(fun, dfun, lo, hi))
        lo, flo = hi, fhi
    raise ArithmeticError(
        f"no sign change of J_{nu} found below x={limit:.3f} (zero #{index})"
    )


def first_zero(nu: float) -> BesselZero:
    """First positive zero of J_nu."""
    return bessel_zero(nu, 1)


def first_max(nu: float) -> float:
    """Abscissa of the first maximum of J_nu (first positive root of J'_nu)."""
    zero = first_zero(nu).value
    nu = float(nu)
    fun = lambda t: _jvp(nu, t)  # noqa: E731
    dfun = lambda t: _jvpp(nu, t, _jv(nu, t), _jvp(nu, t))  # noqa: E731
    lo, hi = nu, zero
    if not (fun(lo) > 0.0 > fun(hi)):
        raise ArithmeticError(f"J'_{nu} does not change sign on ({lo}, {hi})")
    return _refine(fun, dfun, lo, hi)
