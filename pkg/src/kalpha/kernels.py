"""The kernel family g_{alpha,m}, eps_{alpha,m} = int_u^1 g and its inverse.

    g(s)   = s^(-alpha-1) log(1/s)^m / m!
    eps(u) = int_u^1 g(s) ds,            0 < u < 1
    eps*   = inverse of eps, mapping [0, eps(0)) onto (0, 1]

With L = log(1/u) and alpha != 0,

    eps(u) = (-alpha)^(-(m+1)) * [1 - u^(-alpha) * sum_{k<=m} (-alpha L)^k / k!]

which is a regularised incomplete gamma in disguise.  Direct evaluation
cancels badly when |alpha L| is small, so a power series in alpha is used
there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from ._config import get_tolerances


@dataclass(frozen=True)
class MappingParams:
    alpha: float
    m: int = 0

    def __post_init__(self):
        if not (self.alpha < 2):
            raise ValueError(f"alpha must be < 2, got {self.alpha!r}")
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a nonnegative integer, got {self.m!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "m", int(self.m))

    @property
    def eps0(self) -> float:
        """eps_{alpha,m}(0): finite only for alpha < 0."""
        if self.alpha < 0:
            try:
                return (-self.alpha) ** (-(self.m + 1))
            except OverflowError:
                return math.inf
        return math.inf

    def to_dict(self):
        return {"alpha": self.alpha, "m": self.m}


def g_kernel(p: MappingParams, s):
    """``s^(-alpha-1) log(1/s)^m / m!`` for 0 < s <= 1."""
    s = np.asarray(s, float)
    out = s ** (-p.alpha - 1) * np.log(1 / s) ** p.m / math.factorial(p.m)
    return float(out) if out.ndim == 0 else out


def _eps_series(a, m, L):
    # sum_j a^j L^(m+j+1) / (j! m! (m+j+1)), from expanding e^(aL') in int_0^L L'^m e^(aL') dL'/m!
    term = L ** (m + 1) / math.factorial(m)
    total = term / (m + 1)
    j = 0
    while True:
        j += 1
        term *= a * L / j
        inc = term / (m + j + 1)
        total += inc
        if abs(inc) <= 1e-17 * abs(total) or j > 400:
            return total


def _eps_scalar(a, m, u):
    if u >= 1.0:
        return 0.0
    if u <= 0.0:
        return (-a) ** (-(m + 1)) if a < 0 else math.inf
    L = -math.log(u)
    if a == 0.0:
        return L ** (m + 1) / math.factorial(m + 1)
    x = a * L
    if abs(x) < 1.0 or (a > 0 and x < 30.0):
        return _eps_series(a, m, L)
    if a < 0:
        # (-a)^-(m+1) * P(m+1, -a L): regularised lower gamma, no cancellation
        return (-a) ** (-(m + 1)) * float(special.gammainc(m + 1, -x))
    # a > 0 with aL >= 30: u^-a dominates, no cancellation left
    if x > 700.0:
        return math.inf
    if m == 0:
        return math.expm1(x) / a
    s = sum((-x) ** k / math.factorial(k) for k in range(m + 1))
    return (-a) ** (-(m + 1)) * (1.0 - math.exp(x) * s)


def epsilon(p: MappingParams, u):
    """eps_{alpha,m}(u); zero for u >= 1 and eps(0) at u = 0."""
    if np.ndim(u) == 0:
        return _eps_scalar(p.alpha, p.m, float(u))
    u = np.asarray(u, float)
    return np.array([_eps_scalar(p.alpha, p.m, float(x)) for x in u.ravel()]).reshape(u.shape)


def _star_closed(a, m, t):
    if m == 0:
        if a == 0.0:
            return math.exp(-t)
        # (1 + a t)^(-1/a), through log1p for small a t
        return math.exp(-math.log1p(a * t) / a)
    if a == 0.0:
        return math.exp(-(math.factorial(m + 1) * t) ** (1.0 / (m + 1)))
    return None


def _star_bisect(a, m, t, tol):
    # bisection in L = log(1/u), where eps is increasing
    target = tol * max(1.0, t)
    lo, hi = 0.0, 1.0
    while _eps_scalar(a, m, math.exp(-hi)) < t:
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            return 0.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        e = _eps_scalar(a, m, math.exp(-mid))
        if abs(e - t) <= target:
            return math.exp(-mid)
        if e < t:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4e-16 * max(1.0, hi):
            break
    return math.exp(-0.5 * (lo + hi))


def epsilon_star(p: MappingParams, t, tol=None):
    """Inverse of epsilon on [0, eps(0)); 1 at t = 0 and 0 for t >= eps(0)."""
    tol = get_tolerances().inv if tol is None else tol

    def one(t):
        if t <= 0.0:
            return 1.0
        if t >= p.eps0:
            return 0.0
        v = _star_closed(p.alpha, p.m, t)
        return v if v is not None else _star_bisect(p.alpha, p.m, t, tol)

    if np.ndim(t) == 0:
        return one(float(t))
    t = np.asarray(t, float)
    return np.array([one(float(x)) for x in t.ravel()]).reshape(t.shape)


@dataclass(frozen=True)
class KernelTable:
    """Kernel bundle for one (alpha, m) with a cached bracket grid for inversion."""
    params: MappingParams

    @property
    def eps0(self):
        return self.params.eps0

    @cached_property
    def _grid(self):
        a = self.params.alpha
        top = 700.0 if a <= 0 else min(700.0, 690.0 / a)
        L = np.concatenate([[0.0], np.geomspace(1e-8, top, 2000)])
        e = np.array([_eps_scalar(self.params.alpha, self.params.m, math.exp(-x)) for x in L])
        return L, e

    def g(self, s):
        return g_kernel(self.params, s)

    def epsilon(self, u):
        return epsilon(self.params, u)

    def epsilon_star(self, t):
        """Inverse using the cached grid to bracket, then bisection."""
        p = self.params
        if p.m == 0 or p.alpha == 0.0:
            return epsilon_star(p, t)
        L, e = self._grid
        tol = get_tolerances().inv

        def one(t):
            if t <= 0.0:
                return 1.0
            if t >= p.eps0:
                return 0.0
            k = int(np.searchsorted(e, t))
            if k == 0 or k >= len(e):
                return _star_bisect(p.alpha, p.m, t, tol)
            lo, hi = L[k - 1], L[k]
            target = tol * max(1.0, t)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                v = _eps_scalar(p.alpha, p.m, math.exp(-mid))
                if abs(v - t) <= target:
                    return math.exp(-mid)
                if v < t:
                    lo = mid
                else:
                    hi = mid
                if hi - lo <= 4e-16 * max(1.0, hi):
                    break
            return math.exp(-0.5 * (lo + hi))

        if np.ndim(t) == 0:
            return one(float(t))
        t = np.asarray(t, float)
        return np.array([one(float(x)) for x in t.ravel()]).reshape(t.shape)
