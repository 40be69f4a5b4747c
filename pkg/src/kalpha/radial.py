"""Radial components nu_xi of a polar Levy measure.

All variants share one interface: pointwise density, atoms, support and
non-smooth points, closed-form annulus masses and moments where they exist,
and a generic ``integrate`` that falls back to log-substituted adaptive
quadrature.  Divergent integrals come back as ``math.inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ell import EllFunction, PowerLogSpline, Pushforward, log_power_integral
from .quad import integrate_log, upper_gamma

_SLACK = 1e-12
REGIONS = {"near_zero": (0.0, 1.0), "tail": (1.0, math.inf), "full": (0.0, math.inf)}


def _region(region):
    if isinstance(region, tuple):
        lo, hi = map(float, region)
        if not 0 <= lo <= hi:
            raise ValueError("need 0 <= lo <= hi")
        return lo, hi
    try:
        return REGIONS[region]
    except KeyError:
        raise ValueError(f"region must be one of {sorted(REGIONS)}, got {region!r}") from None


class RadialMeasure:
    kind = "abstract"
    has_density = True

    # -- pointwise -------------------------------------------------------
    def rho(self, r: float) -> float:
        raise NotImplementedError

    def density(self, r):
        a = np.asarray(r, float)
        out = np.array([self.rho(float(x)) for x in np.atleast_1d(a).ravel()])
        return float(out[0]) if a.ndim == 0 else out.reshape(a.shape)

    def atoms(self) -> tuple:
        return ()

    def breakpoints(self) -> tuple:
        return ()

    def support(self) -> tuple:
        return 0.0, math.inf

    # -- asymptotics of the density (None: no mass there / faster than any power)
    def near_zero_power(self):
        return None

    def tail_power(self):
        return None

    # -- integrals -------------------------------------------------------
    def integrate(self, f, lo=0.0, hi=math.inf, points=(), tol=None) -> float:
        """``int_(lo,hi] f dnu`` by quadrature against the density plus atoms."""
        total = 0.0
        for r0, w in self.atoms():
            if lo < r0 <= hi:
                total += w * f(r0)
        if self.has_density:
            s_lo, s_hi = self.support()
            a, b = max(lo, s_lo), min(hi, s_hi)
            if b > a:
                rho = self.rho
                total += integrate_log(lambda r: f(r) * rho(r), a, b,
                                       points=(*self.breakpoints(), *points), tol=tol)
        return total

    def _diverges(self, delta, lo, hi):
        if lo == 0.0:
            p = self.near_zero_power()
            if p is not None and p + delta <= -1.0 + _SLACK:
                return True
        if math.isinf(hi):
            p = self.tail_power()
            if p is not None and p + delta >= -1.0 - _SLACK:
                return True
        return False

    def moment(self, delta: float, region: str = "full", logpow: int = 0) -> float:
        """``int r^delta log(r)^logpow nu(dr)`` over near_zero (0,1], tail (1,inf), full,
        or an explicit ``(lo, hi)`` interval."""
        lo, hi = _region(region)
        if not hi > lo:
            return 0.0
        if self._diverges(delta, lo, hi):
            return math.inf
        return self._moment(delta, lo, hi, logpow)

    def _moment(self, delta, lo, hi, logpow):
        if logpow:
            return self.integrate(lambda r: r ** delta * math.log(r) ** logpow, lo, hi)
        return self.integrate(lambda r: r ** delta, lo, hi)

    def measure(self, lo: float = 0.0, hi: float = math.inf) -> float:
        """nu((lo, hi])."""
        if not hi > lo:
            return 0.0
        if self._diverges(0.0, lo, hi):
            return math.inf
        return self._measure(lo, hi)

    def _measure(self, lo, hi):
        return self.integrate(lambda r: 1.0, lo, hi)

    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class PowerLaw(RadialMeasure):
    """Density ``c r^(-beta-1)`` on (0, inf)."""
    c: float
    beta: float
    kind = "power_law"

    def rho(self, r):
        return self.c * r ** (-self.beta - 1)

    def density(self, r):
        return self.c * np.asarray(r, float) ** (-self.beta - 1)

    def near_zero_power(self):
        return -self.beta - 1

    def tail_power(self):
        return -self.beta - 1

    def _moment(self, delta, lo, hi, logpow):
        return self.c * log_power_integral(delta - self.beta, logpow, lo, hi)

    def _measure(self, lo, hi):
        return self.c * log_power_integral(-self.beta, 0, lo, hi)

    def is_zero(self):
        return self.c == 0


@dataclass(frozen=True)
class TiltedPowerLaw(RadialMeasure):
    """Density ``c r^(-beta-1) exp(-theta r)``."""
    c: float
    beta: float
    theta: float
    kind = "tilted"

    def rho(self, r):
        return self.c * r ** (-self.beta - 1) * math.exp(-self.theta * r)

    def density(self, r):
        r = np.asarray(r, float)
        return self.c * r ** (-self.beta - 1) * np.exp(-self.theta * r)

    def near_zero_power(self):
        return -self.beta - 1

    def tail_power(self):
        return None if self.theta > 0 else -self.beta - 1

    def _moment(self, delta, lo, hi, logpow):
        if logpow or self.theta <= 0:
            return super()._moment(delta, lo, hi, logpow)
        # c theta^(beta-delta) [Gamma(delta-beta, theta lo) - Gamma(delta-beta, theta hi)]
        a = delta - self.beta
        th = self.theta
        return self.c * th ** (-a) * (upper_gamma(a, th * lo) - upper_gamma(a, th * hi))

    def _measure(self, lo, hi):
        return self._moment(0.0, lo, hi, 0)

    def is_zero(self):
        return self.c == 0


@dataclass(frozen=True)
class DiracAtom(RadialMeasure):
    r0: float
    mass: float
    kind = "dirac"
    has_density = False

    def rho(self, r):
        return 0.0

    def density(self, r):
        a = np.asarray(r, float)
        return 0.0 if a.ndim == 0 else np.zeros_like(a)

    def atoms(self):
        return ((self.r0, self.mass),)

    def support(self):
        return self.r0, self.r0

    def _moment(self, delta, lo, hi, logpow):
        if lo < self.r0 <= hi:
            return self.mass * self.r0 ** delta * math.log(self.r0) ** logpow
        return 0.0

    def _measure(self, lo, hi):
        return self.mass if lo < self.r0 <= hi else 0.0

    def is_zero(self):
        return self.mass == 0


@dataclass(frozen=True, eq=False)
class KClass(RadialMeasure):
    """Density ``r^(-alpha-1) ell(r)``."""
    alpha: float
    ell: EllFunction
    kind = "kclass"

    def __eq__(self, other):
        return (type(other) is KClass and self.alpha == other.alpha
                and (self.ell is other.ell or self.ell == other.ell))

    def __hash__(self):
        return hash((self.alpha, id(self.ell)))

    @cached_property
    def spline(self):
        return self.ell.to_spline()

    def rho(self, r):
        return r ** (-self.alpha - 1) * self.ell.scalar(r)

    def density(self, r):
        r = np.asarray(r, float)
        return r ** (-self.alpha - 1) * self.ell(r)

    def breakpoints(self):
        return self.ell.breakpoints()

    def support(self):
        return self.ell.support_start(), self.ell.support_end()

    def near_zero_power(self):
        p0 = self.ell.powers()[0]
        if p0 is None or self.ell.support_start() > 0:
            return None
        return p0 - self.alpha - 1

    def tail_power(self):
        pinf = self.ell.powers()[1]
        if pinf is None or math.isfinite(self.ell.support_end()):
            return None
        return pinf - self.alpha - 1

    def _moment(self, delta, lo, hi, logpow):
        if self.spline is not None:
            return self.spline.integral(lo, hi, dq=delta - self.alpha, extra_log=logpow)
        if isinstance(self.ell, Pushforward) and self.ell.alpha == self.alpha and not logpow:
            return self.ell.image_moment(delta, lo, hi)
        return super()._moment(delta, lo, hi, logpow)

    def _measure(self, lo, hi):
        if self.spline is not None:
            return self.spline.integral(lo, hi, dq=-self.alpha)
        if isinstance(self.ell, Pushforward) and self.ell.alpha == self.alpha:
            return self.ell.image_measure(lo, hi)
        return super()._measure(lo, hi)

    def is_zero(self):
        s = self.spline
        return s is not None and not any(s.pieces)


@dataclass(frozen=True)
class Tabulated(RadialMeasure):
    """Density given at nodes, log-log interpolated, optionally power-law extrapolated.

    The extrapolating power is fitted by least squares on the outermost decade
    of nodes and anchored at the end node.  Densities must be positive.
    """
    r: tuple
    values: tuple
    extrapolate_low: bool = True
    extrapolate_high: bool = True
    kind = "tabulated"

    def __post_init__(self):
        r = np.asarray(self.r, float)
        v = np.asarray(self.values, float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
            raise ValueError("need matching 1-d node and density arrays with >= 2 nodes")
        if np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("nodes must be positive and increasing")
        if np.any(v <= 0):
            raise ValueError("tabulated densities must be positive")

    def _end_slope(self, high):
        x = np.log(np.asarray(self.r, float))
        y = np.log(np.asarray(self.values, float))
        if high:
            sel = x >= min(x[-1] - math.log(10.0), x[-2])
        else:
            sel = x <= max(x[0] + math.log(10.0), x[1])
        return float(np.polyfit(x[sel], y[sel], 1)[0])

    @cached_property
    def spline(self) -> PowerLogSpline:
        # as a KClass with alpha = -1 the ell factor is the density itself
        r = [float(x) for x in self.r]
        v = [float(x) for x in self.values]
        pieces = []
        if self.extrapolate_low:
            s = self._end_slope(False)
            pieces.append(((v[0] * r[0] ** (-s), s, 0),))
        else:
            pieces.append(())
        for j in range(len(r) - 1):
            s = math.log(v[j + 1] / v[j]) / math.log(r[j + 1] / r[j])
            pieces.append(((v[j] * r[j] ** (-s), s, 0),))
        if self.extrapolate_high:
            s = self._end_slope(True)
            pieces.append(((v[-1] * r[-1] ** (-s), s, 0),))
        else:
            pieces.append(())
        return PowerLogSpline(tuple(r), tuple(pieces))

    @cached_property
    def _kc(self):
        return KClass(-1.0, self.spline)

    def rho(self, r):
        return self.spline.eval_scalar(r)

    def density(self, r):
        return self.spline(r)

    def breakpoints(self):
        return tuple(self.r)

    def support(self):
        return self._kc.support()

    def near_zero_power(self):
        return self._kc.near_zero_power()

    def tail_power(self):
        return self._kc.tail_power()

    def _moment(self, delta, lo, hi, logpow):
        return self._kc._moment(delta, lo, hi, logpow)

    def _measure(self, lo, hi):
        return self._kc._measure(lo, hi)


@dataclass(frozen=True, eq=False)
class DilationResidual(RadialMeasure):
    """Density ``rho(u) - c^(-alpha-1) rho(u/c)`` for a base radial ``rho``.

    This is the radial part of the cofactor in ``mu = mu(c .)^(c^-alpha) * mu_c``;
    integrals are taken by quadrature of the pointwise difference.
    """
    base: RadialMeasure
    alpha: float
    c: float
    kind = "dilation_residual"

    def rho(self, u):
        b = self.base
        return b.rho(u) - self.c ** (-self.alpha - 1) * b.rho(u / self.c)

    def breakpoints(self):
        bp = self.base.breakpoints()
        return tuple(sorted({*bp, *(self.c * x for x in bp)}))

    def support(self):
        lo, hi = self.base.support()
        return self.c * lo, hi

    def near_zero_power(self):
        return self.base.near_zero_power()

    def tail_power(self):
        return self.base.tail_power()

    def atoms(self):
        return ()

    def is_zero(self):
        return self.base.is_zero()
