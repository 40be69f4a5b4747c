"""Radial integrals that involve the centering function x / (1 + |x|^2).

    J(s)  = int r (1/(1+r^2) - 1/(1+s^2 r^2)) nu(dr)
    I3(s) = int r^3 / (1 + s^2 r^2) nu(dr)

J is the drift correction picked up when a Levy measure is dilated by s;
I3(1) is the gap between the drift gamma and the mean.
"""
from __future__ import annotations

import math

from .ell import PowerLogSpline
from .radial import DiracAtom, KClass, PowerLaw, RadialMeasure


def power_constant(beta: float) -> float:
    """``int_0^inf r^-beta / (1 + r^2) dr = pi / (2 cos(pi beta / 2))`` for |beta| < 1,
    written so that the analytic continuation used in ``J`` stays accurate near beta = 1."""
    return -math.pi / (2.0 * math.sin(0.5 * math.pi * (beta - 1.0)))


def as_power_law(nu: RadialMeasure):
    """``nu`` as a ``PowerLaw`` if its density is a single pure power, else None."""
    if isinstance(nu, PowerLaw):
        return nu
    if isinstance(nu, KClass):
        s = nu.spline
        if isinstance(s, PowerLogSpline) and not s.breaks and len(s.pieces[0]) == 1:
            c, q, n = s.pieces[0][0]
            if n == 0 and c > 0:
                return PowerLaw(c, nu.alpha - q)
    return None


def J(nu: RadialMeasure, s: float) -> float:
    pl = as_power_law(nu)
    if pl is not None and 0 < pl.beta < 2:
        if pl.beta == 1.0:
            return pl.c * math.log(s)
        return pl.c * power_constant(pl.beta) * -math.expm1((pl.beta - 1.0) * math.log(s))
    if isinstance(nu, DiracAtom):
        r = nu.r0
        return nu.mass * r * (1.0 / (1.0 + r * r) - 1.0 / (1.0 + s * s * r * r))
    s2 = s * s
    inner = nu.integrate(lambda r: r ** 3 / ((1.0 + r * r) * (1.0 + s2 * r * r)),
                         points=(1.0 / s,))
    return -(1.0 - s2) * inner


def I3(nu: RadialMeasure, s: float = 1.0) -> float:
    if math.isinf(nu.moment(1.0, "tail")):
        return math.inf
    pl = as_power_law(nu)
    if pl is not None and 1 < pl.beta < 2:
        return -pl.c * s ** (pl.beta - 3.0) * power_constant(pl.beta)
    if isinstance(nu, DiracAtom):
        r = nu.r0
        return nu.mass * r ** 3 / (1.0 + s * s * r * r)
    s2 = s * s
    return nu.integrate(lambda r: r ** 3 / (1.0 + s2 * r * r), points=(1.0 / s,))
