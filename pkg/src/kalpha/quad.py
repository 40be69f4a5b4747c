"""Adaptive quadrature on (0, inf) and a few special functions.

The adaptive engine is QUADPACK (through :func:`scipy.integrate.quad`); this
module adds the log-substitution and piece splitting used for radial
integrals, converts QUADPACK failure codes into
:class:`~kalpha.errors.QuadratureNonConvergence`, and provides
``upper_gamma`` for negative shape parameters.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate as _si
from scipy import special

from ._config import get_tolerances
from .errors import QuadratureNonConvergence

EPSREL = 1e-12
LIMIT = 500          # subintervals per QUADPACK call
_XCLIP = 700.0       # exp(+-700) is the edge of double range


def quad(f, a, b, *, tol=None, weight=None, wvar=None):
    """Scalar adaptive quadrature with failure reporting."""
    tol = get_tolerances().quad if tol is None else tol
    kw = dict(full_output=1, limit=LIMIT)
    if weight is not None:
        kw.update(weight=weight, wvar=wvar)
        if math.isinf(b):
            kw.update(limlst=200)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = _si.quad(f, a, b, epsabs=tol, epsrel=EPSREL, **kw)
    val, err = float(res[0]), float(res[1])
    if not math.isfinite(val):
        raise QuadratureNonConvergence(f"non-finite integral on [{a}, {b}]")
    if len(res) > 3:
        # QUADPACK flagged trouble; accept only if the error estimate is still in budget
        if err > 10.0 * max(tol, EPSREL * abs(val)):
            raise QuadratureNonConvergence(
                f"quadrature on [{a}, {b}] stalled: estimate {val!r} +- {err:.3g}"
            )
    return val


def _cuts(a, b, points):
    pts = {float(a), float(b)}
    for p in points:
        p = float(p)
        if a < p < b and math.isfinite(p):
            pts.add(p)
    return sorted(pts)


def integrate_log(f, a, b, *, points=(), tol=None):
    """Integral of ``f`` over ``(a, b)`` with ``0 <= a < b <= inf``.

    The range is split at ``points`` and at 1; each piece is integrated in
    ``x = log r`` so that power-law behaviour at 0 and infinity becomes
    exponential decay.
    """
    if not b > a:
        return 0.0
    cuts = _cuts(a, b, (1.0, *points))
    tol = get_tolerances().quad if tol is None else tol
    piece_tol = tol / max(1, len(cuts) - 1)

    def g(x):
        if x > _XCLIP or x < -_XCLIP:
            return 0.0
        r = math.exp(x)
        try:
            v = f(r) * r
        except OverflowError:
            # an intermediate factor overflowed far out in x; callers only integrate
            # convergent integrands, which are negligible there
            return 0.0
        return v if math.isfinite(v) else 0.0

    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        xlo = -math.inf if lo == 0.0 else math.log(lo)
        xhi = math.inf if math.isinf(hi) else math.log(hi)
        total += quad(g, xlo, xhi, tol=piece_tol)
    return total


def sin_minus_x(y):
    """``sin(y) - y`` without cancellation for small ``y``."""
    if abs(y) >= 0.5:
        return math.sin(y) - y
    y2 = y * y
    term = -y * y2 / 6.0
    total = term
    k = 3
    while abs(term) > 1e-18 * abs(y):
        term *= -y2 / ((k + 1) * (k + 2))
        total += term
        k += 2
    return total


def upper_gamma(a, x):
    """Non-normalised upper incomplete gamma ``Gamma(a, x)`` for any real ``a``, ``x >= 0``."""
    if math.isinf(x):
        return 0.0
    if x == 0.0:
        return special.gamma(a) if a > 0 else math.inf
    if a > 0:
        return float(special.gamma(a) * special.gammaincc(a, x))
    if a == 0:
        return float(special.exp1(x))
    # Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a, stepped down from a positive shape
    n = math.ceil(-a) if a != math.floor(a) else int(-a)
    b = a + n
    val = upper_gamma(b, x)
    for _ in range(n):
        b -= 1.0
        val = (val - x ** b * math.exp(-x)) / b
    return val


def lower_gamma(a, x):
    """Non-normalised lower incomplete gamma, ``a > 0``."""
    if math.isinf(x):
        return float(special.gamma(a))
    return float(special.gamma(a) * special.gammainc(a, x))


def gauss_legendre_log(f, lo, hi, n=32):
    """Fixed-order Gauss-Legendre rule in ``log r`` on ``[lo, hi]``, vectorised over the
    leading axis of ``lo``/``hi``. Used where the integrand is smooth on every panel."""
    x, w = np.polynomial.legendre.leggauss(n)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    a, b = np.log(lo), np.log(hi)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * x
    r = np.exp(nodes)
    return np.sum(w * f(r) * r, axis=-1) * half
