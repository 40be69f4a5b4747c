"""The slowly varying factor ell of a K_alpha radial density r^(-alpha-1) ell(r).

Every variant is evaluable at any r > 0 (vectorised), reports its
non-smooth points, whether it is nonincreasing by construction, and its
limit at infinity.  ``PowerLogSpline`` is the workhorse closed form: on each
piece of a partition of (0, inf) it is a finite sum of terms
``coef * r**q * log(r)**n``.  Step functions, power tails and the log
factors produced by iterated maps are all special cases, and the family is
closed under the radial map, so iterating never falls back to nested
quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

_QZERO = 1e-12


def _as_array(r):
    a = np.asarray(r, dtype=float)
    return a, a.ndim == 0


class EllFunction:
    kind = "abstract"

    def __call__(self, r):
        a, scalar = _as_array(r)
        out = self._eval(np.atleast_1d(a))
        return float(out[0]) if scalar else out.reshape(a.shape)

    def _eval(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self) -> tuple:
        return ()

    @property
    def known_monotone(self) -> bool:
        """True when nonincreasing and nonnegative by construction."""
        return False

    def limit_at_inf(self) -> float:
        raise NotImplementedError

    def support_end(self) -> float:
        """Smallest R with ell = 0 on [R, inf), or inf."""
        return math.inf

    def support_start(self) -> float:
        """Largest R with ell = 0 on (0, R)."""
        return 0.0

    def powers(self):
        """Exponents (p0, pinf) with ell ~ r^p0 near 0 and ell ~ r^pinf at infinity,
        up to log factors.  None means no mass there (p0) or faster than any
        power decay (pinf)."""
        return 0.0, None

    def scalar(self, r: float) -> float:
        return float(self(r))

    def to_spline(self):
        """Equivalent ``PowerLogSpline`` or None when there is no closed form."""
        return None


# ---------------------------------------------------------------------------
# Closed-form piecewise power-log family

def log_power_antideriv(q, n, r):
    """An antiderivative of ``r**(q-1) * log(r)**n`` evaluated at ``r`` (0 < r <= inf).

    At r = inf the value is the limit, 0 for q < 0.
    """
    if math.isinf(r):
        if q < 0:
            return 0.0
        return math.inf
    L = math.log(r)
    if abs(q) < _QZERO:
        return L ** (n + 1) / (n + 1)
    # r^q sum_i (-1)^i n!/(n-i)! L^(n-i) / q^(i+1)
    total = 0.0
    fac = 1.0
    for i in range(n + 1):
        total += (-1) ** i * fac * L ** (n - i) / q ** (i + 1)
        fac *= n - i
    return r ** q * total


def log_power_terms(q, n):
    """Antiderivative of ``r**(q-1) log(r)**n`` as a list of (coef, q', n') terms."""
    if abs(q) < _QZERO:
        return [(1.0 / (n + 1), 0.0, n + 1)]
    out = []
    fac = 1.0
    for i in range(n + 1):
        out.append(((-1) ** i * fac / q ** (i + 1), q, n - i))
        fac *= n - i
    return out


def log_power_integral(q, n, lo, hi):
    """``int_lo^hi r**(q-1) log(r)**n dr`` for 0 < lo <= hi <= inf."""
    if not hi > lo:
        return 0.0
    if lo == 0.0:
        if q <= 0:
            return math.inf
        return log_power_antideriv(q, n, hi)  # lower limit vanishes for q > 0
    if math.isinf(hi) and q >= 0:
        return math.inf
    return log_power_antideriv(q, n, hi) - log_power_antideriv(q, n, lo)


def _merge_terms(terms, drop=0.0):
    acc: dict = {}
    for coef, q, n in terms:
        key = (round(float(q), 14), int(n))
        acc[key] = acc.get(key, 0.0) + coef
    return tuple(sorted((c, q, n) for (q, n), c in acc.items() if c != 0.0 and abs(c) > drop))


@dataclass(frozen=True)
class PowerLogSpline(EllFunction):
    """Piecewise sum of ``coef * r**q * log(r)**n``.

    ``breaks`` are the interior cut points b_1 < ... < b_K; piece i covers
    [b_i, b_(i+1)) with b_0 = 0 and b_(K+1) = inf, so the function is
    right-continuous.  ``pieces[i]`` is a tuple of (coef, q, n) triples.
    """
    breaks: tuple
    pieces: tuple
    monotone_hint: bool = False
    kind = "spline"

    def __post_init__(self):
        if len(self.pieces) != len(self.breaks) + 1:
            raise ValueError("need len(breaks) + 1 pieces")
        if any(b <= 0 or not math.isfinite(b) for b in self.breaks):
            raise ValueError("breaks must be finite and positive")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must be strictly increasing")

    @cached_property
    def edges(self):
        return (0.0, *self.breaks, math.inf)

    def _eval(self, r):
        out = np.zeros_like(r)
        idx = np.searchsorted(np.asarray(self.breaks), r, side="right")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            L = np.log(r)
            for i, terms in enumerate(self.pieces):
                sel = idx == i
                if not terms or not sel.any():
                    continue
                rs, Ls = r[sel], L[sel]
                val = np.zeros_like(rs)
                for coef, q, n in terms:
                    val += coef * rs ** q * Ls ** n
                out[sel] = val
        return out

    def eval_scalar(self, r: float) -> float:
        i = int(np.searchsorted(self.breaks, r, side="right")) if self.breaks else 0
        L = math.log(r)
        return math.fsum(c * r ** q * L ** n for c, q, n in self.pieces[i])

    def breakpoints(self):
        return tuple(self.breaks)

    def scalar(self, r):
        return self.eval_scalar(r)

    @property
    def known_monotone(self):
        return self.monotone_hint

    def support_start(self):
        for (a, _), terms in zip(zip(self.edges[:-1], self.edges[1:]), self.pieces):
            if terms:
                return a
        return math.inf

    def powers(self):
        first, last = self.pieces[0], self.pieces[-1]
        p0 = min(q for _, q, _ in first) if first else None
        pinf = max(q for _, q, _ in last) if last else None
        return p0, pinf

    def support_end(self):
        k = len(self.pieces) - 1
        while k >= 0 and not self.pieces[k]:
            k -= 1
        if k == len(self.pieces) - 1:
            return math.inf
        return self.edges[k + 1]

    def limit_at_inf(self):
        last = self.pieces[-1]
        if not last:
            return 0.0
        # dominant behaviour: largest q, then largest log power
        qmax = max(q for _, q, _ in last)
        if qmax < -_QZERO:
            return 0.0
        top = [(c, n) for c, q, n in last if abs(q - qmax) <= _QZERO]
        nmax = max(n for _, n in top)
        lead = sum(c for c, n in top if n == nmax)
        if qmax > _QZERO or nmax > 0:
            return math.copysign(math.inf, lead)
        return lead

    def to_spline(self):
        return self

    def scaled(self, factor: float) -> "PowerLogSpline":
        return PowerLogSpline(self.breaks,
                              tuple(tuple((c * factor, q, n) for c, q, n in p) for p in self.pieces),
                              self.monotone_hint and factor >= 0)

    def shifted_power(self, dq: float) -> "PowerLogSpline":
        """The spline times r**dq."""
        return PowerLogSpline(self.breaks,
                              tuple(tuple((c, q + dq, n) for c, q, n in p) for p in self.pieces))

    def integral(self, lo, hi, dq=0.0, extra_log=0):
        """``int_lo^hi r**(dq-1) log(r)**extra_log * self(r) dr`` in closed form."""
        total = 0.0
        if not hi > lo:
            return 0.0
        for (a, b), terms in zip(zip(self.edges[:-1], self.edges[1:]), self.pieces):
            x, y = max(a, lo), min(b, hi)
            if not y > x or not terms:
                continue
            for c, q, n in terms:
                v = log_power_integral(q + dq, n + extra_log, x, y)
                if math.isinf(v):
                    return math.inf
                total += c * v
        return total


# ---------------------------------------------------------------------------
# Named variants

@dataclass(frozen=True)
class StepDown(EllFunction):
    """Right-continuous step function: ``levels[i]`` on [breaks[i-1], breaks[i])."""
    breaks: tuple
    levels: tuple
    kind = "step_down"

    def __post_init__(self):
        if len(self.levels) != len(self.breaks) + 1:
            raise ValueError("StepDown needs len(breaks) + 1 levels")

    @cached_property
    def _spline(self):
        return PowerLogSpline(tuple(self.breaks),
                              tuple(((float(v), 0.0, 0),) if v != 0 else () for v in self.levels),
                              self.known_monotone)

    def _eval(self, r):
        idx = np.searchsorted(np.asarray(self.breaks, float), r, side="right")
        return np.asarray(self.levels, float)[idx]

    def breakpoints(self):
        return tuple(self.breaks)

    @property
    def known_monotone(self):
        lv = self.levels
        return all(b >= a for a, b in zip(lv[1:], lv[:-1])) and lv[-1] >= 0

    def limit_at_inf(self):
        return float(self.levels[-1])

    def support_end(self):
        return self._spline.support_end()

    def support_start(self):
        return self._spline.support_start()

    def powers(self):
        return self._spline.powers()

    def scalar(self, r):
        return self._spline.eval_scalar(r)

    def to_spline(self):
        return self._spline


@dataclass(frozen=True)
class PowerTail(EllFunction):
    """``c * r**(-p)``."""
    c: float
    p: float
    kind = "power_tail"

    def _eval(self, r):
        return self.c * r ** (-self.p)

    @property
    def known_monotone(self):
        return self.c >= 0 and self.p >= 0

    def limit_at_inf(self):
        if self.c == 0:
            return 0.0
        if self.p > 0:
            return 0.0
        return self.c if self.p == 0 else math.copysign(math.inf, self.c)

    def powers(self):
        return (-self.p, -self.p) if self.c != 0 else (None, None)

    def scalar(self, r):
        return self.c * r ** (-self.p)

    def to_spline(self):
        return PowerLogSpline((), (((self.c, -self.p, 0),),), self.known_monotone)


@dataclass(frozen=True)
class ExpTail(EllFunction):
    """``c * exp(-theta r)``."""
    c: float
    theta: float
    kind = "exp_tail"

    def _eval(self, r):
        return self.c * np.exp(-self.theta * r)

    def scalar(self, r):
        return self.c * math.exp(-self.theta * r)

    def powers(self):
        return 0.0, (None if self.theta > 0 else 0.0)

    @property
    def known_monotone(self):
        return self.c >= 0 and self.theta > 0

    def limit_at_inf(self):
        if self.theta > 0 or self.c == 0:
            return 0.0
        return self.c if self.theta == 0 else math.copysign(math.inf, self.c)


@dataclass(frozen=True)
class LogFactor(EllFunction):
    """``base(r) * log(scale/r)**k`` on (0, scale), zero beyond."""
    base: EllFunction
    k: int
    scale: float = 1.0
    kind = "log_factor"

    def _eval(self, r):
        out = np.zeros_like(r)
        sel = r < self.scale
        out[sel] = self.base(r[sel]) * np.log(self.scale / r[sel]) ** self.k
        return out

    def breakpoints(self):
        return tuple(sorted({*self.base.breakpoints(), self.scale}))

    @property
    def known_monotone(self):
        return self.base.known_monotone

    def limit_at_inf(self):
        return 0.0

    def support_end(self):
        return min(self.scale, self.base.support_end())

    def support_start(self):
        return self.base.support_start()

    def powers(self):
        p0 = self.base.powers()[0]
        return p0, None

    def to_spline(self):
        b = self.base.to_spline()
        if b is None:
            return None
        # log(scale/r)^k = sum_j C(k,j) log(scale)^(k-j) (-log r)^j
        Ls = math.log(self.scale)
        poly = [(math.comb(self.k, j) * Ls ** (self.k - j) * (-1) ** j, j) for j in range(self.k + 1)]
        cuts = sorted({*b.breaks, self.scale})
        pieces = []
        for lo in (0.0, *cuts):
            if lo >= self.scale:
                pieces.append(())
                continue
            i = int(np.searchsorted(b.breaks, lo, side="right")) if b.breaks else 0
            terms = [(c * pc, q, n + j) for c, q, n in b.pieces[i] for pc, j in poly]
            pieces.append(_merge_terms(terms))
        return PowerLogSpline(tuple(cuts), tuple(pieces), self.known_monotone)


@dataclass(frozen=True)
class Composite(EllFunction):
    """Finite sum of ell functions."""
    terms: tuple
    kind = "composite"

    def _eval(self, r):
        out = np.zeros_like(r)
        for t in self.terms:
            out += t(r)
        return out

    def breakpoints(self):
        return tuple(sorted({b for t in self.terms for b in t.breakpoints()}))

    @property
    def known_monotone(self):
        return all(t.known_monotone for t in self.terms)

    def limit_at_inf(self):
        return sum(t.limit_at_inf() for t in self.terms)

    def support_end(self):
        return max((t.support_end() for t in self.terms), default=0.0)

    def support_start(self):
        return min((t.support_start() for t in self.terms), default=math.inf)

    def powers(self):
        p0s = [t.powers()[0] for t in self.terms]
        pis = [t.powers()[1] for t in self.terms]
        p0s = [p for p in p0s if p is not None]
        pis = [p for p in pis if p is not None]
        return (min(p0s) if p0s else None), (max(pis) if pis else None)

    def to_spline(self):
        parts = [t.to_spline() for t in self.terms]
        if any(p is None for p in parts):
            return None
        cuts = sorted({b for p in parts for b in p.breaks})
        pieces = []
        for lo in (0.0, *cuts):
            terms = []
            for p in parts:
                i = int(np.searchsorted(p.breaks, lo, side="right")) if p.breaks else 0
                terms.extend(p.pieces[i])
            pieces.append(_merge_terms(terms))
        return PowerLogSpline(tuple(cuts), tuple(pieces), self.known_monotone)


@dataclass(frozen=True)
class TabulatedEll(EllFunction):
    """Values on a geometric grid, log-log interpolated, power-law extrapolated.

    Used to export quadrature-defined ell functions; nodes must be positive.
    """
    r: tuple
    values: tuple
    kind = "tabulated"

    @cached_property
    def _logs(self):
        x = np.log(np.asarray(self.r, float))
        v = np.asarray(self.values, float)
        with np.errstate(divide="ignore"):
            y = np.log(v)
        return x, y

    def _slopes(self):
        x, y = self._logs
        lo = x <= x[0] + math.log(10.0)
        hi = x >= x[-1] - math.log(10.0)
        s_lo = np.polyfit(x[lo], y[lo], 1)[0] if lo.sum() > 1 else 0.0
        s_hi = np.polyfit(x[hi], y[hi], 1)[0] if hi.sum() > 1 and np.all(np.isfinite(y[hi])) else -np.inf
        return s_lo, s_hi

    def _eval(self, r):
        x, y = self._logs
        s_lo, s_hi = self._slopes()
        lr = np.log(r)
        with np.errstate(invalid="ignore"):
            out = np.exp(np.interp(lr, x, y))
            below = lr < x[0]
            above = lr > x[-1]
            out[below] = np.exp(y[0] + s_lo * (lr[below] - x[0]))
            out[above] = np.exp(y[-1] + s_hi * (lr[above] - x[-1])) if np.isfinite(s_hi) else 0.0
        return out

    def breakpoints(self):
        return (self.r[0], self.r[-1])

    @property
    def known_monotone(self):
        v = self.values
        s_lo, s_hi = self._slopes()
        return all(b <= a for a, b in zip(v, v[1:])) and s_lo <= 0 and s_hi < 0

    def limit_at_inf(self):
        s_hi = self._slopes()[1]
        return 0.0 if s_hi < 0 or self.values[-1] == 0 else math.inf

    def powers(self):
        s_lo, s_hi = self._slopes()
        return float(s_lo), (float(s_hi) if np.isfinite(s_hi) else None)


@dataclass(frozen=True, eq=False)
class Pushforward(EllFunction):
    """``(1/m!) int_u^inf log(r/u)**m r**alpha nu(dr)`` for a radial measure ``nu``.

    The image factor of a radial measure with no closed form.  Evaluated by
    quadrature at each point; nonincreasing by construction.
    """
    radial: object
    alpha: float
    m: int = 0
    kind = "pushforward"

    def value(self, u: float) -> float:
        from .radial import TiltedPowerLaw
        from .quad import upper_gamma
        nu, a, m = self.radial, self.alpha, self.m
        if isinstance(nu, TiltedPowerLaw) and m == 0:
            # c int_u^inf r^(a-beta-1) e^(-theta r) dr
            s = a - nu.beta
            return nu.c * nu.theta ** (-s) * upper_gamma(s, nu.theta * u)
        fm = math.factorial(m)
        if m == 0:
            return nu.integrate(lambda r: r ** a, u, math.inf)
        return nu.integrate(lambda r: math.log(r / u) ** m * r ** a, u, math.inf) / fm

    def _eval(self, r):
        return np.array([self.value(float(x)) for x in r])

    def scalar(self, r):
        return self.value(r)

    def breakpoints(self):
        return tuple(self.radial.breakpoints())

    def powers(self):
        near = self.radial.near_zero_power()
        tail = self.radial.tail_power()
        p0 = 0.0 if near is None else min(0.0, near + self.alpha + 1)
        pinf = None if tail is None else tail + self.alpha + 1
        return p0, pinf

    @property
    def known_monotone(self):
        return True

    def limit_at_inf(self):
        return 0.0

    def support_end(self):
        return self.radial.support()[1]

    def image_measure(self, lo, hi):
        """Mass of r^(-alpha-1) self(r) dr over (lo, hi], by exchanging the order of
        integration: int nu(dr) [eps(lo/r) - eps(hi/r)]."""
        from .kernels import MappingParams, epsilon
        p = MappingParams(self.alpha, self.m)
        if lo == 0.0 and p.eps0 == math.inf:
            return math.inf

        def f(r):
            a = epsilon(p, lo / r) if lo > 0 else p.eps0
            b = epsilon(p, hi / r) if math.isfinite(hi) else 0.0
            return a - b
        return self.radial.integrate(f, lo, math.inf, points=(hi,) if math.isfinite(hi) else ())

    def image_moment(self, delta, lo, hi):
        """int_(lo,hi] u^delta r^(-alpha-1) self(u) du as int nu(dr) r^delta int g(s) s^delta ds;
        the inner integral is an epsilon kernel at level alpha - delta."""
        from .kernels import MappingParams, epsilon
        p = MappingParams(self.alpha - delta, self.m)
        if lo == 0.0 and p.eps0 == math.inf:
            return math.inf

        def f(r):
            a = epsilon(p, lo / r) if lo > 0 else p.eps0
            b = epsilon(p, hi / r) if math.isfinite(hi) else 0.0
            return r ** delta * (a - b)
        return self.radial.integrate(f, lo, math.inf, points=(hi,) if math.isfinite(hi) else ())

    def tabulate(self, n: int = 200, span=None) -> TabulatedEll:
        """Export on a geometric grid."""
        if span is None:
            lo, hi = self.radial.support()
            lo = (lo if lo > 0 else 1e-3) / 10
            hi = (hi if math.isfinite(hi) else 1e3) * 10
        else:
            lo, hi = span
        grid = np.geomspace(lo, hi, n)
        return TabulatedEll(tuple(grid.tolist()), tuple(self(grid).tolist()))
