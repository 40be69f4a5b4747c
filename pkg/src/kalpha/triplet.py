"""Levy-Khintchine triplets (A, nu, gamma) with a finite polar Levy measure.

The Levy measure is ``nu(B) = sum_i w_i int 1_B(r xi_i) nu_i(dr)`` and the
characteristic exponent uses the centering x / (1 + |x|^2):

    psi(z) = -<z,Az>/2 + i<gamma,z> + sum_i w_i int (e^{irs} - 1 - irs/(1+r^2)) nu_i(dr),
    s = <z, xi_i>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from .quad import integrate_log, quad, sin_minus_x
from .radial import RadialMeasure

# r beyond OSC/|s| is integrated with Fourier-weighted quadrature
OSC = 30.0


def _frozen_array(x, ndim):
    a = np.array(x, dtype=float)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SphericalAtom:
    xi: np.ndarray
    w: float
    radial: RadialMeasure

    def __post_init__(self):
        object.__setattr__(self, "xi", _frozen_array(self.xi, 1))
        object.__setattr__(self, "w", float(self.w))


@dataclass(frozen=True, eq=False)
class PolarLevyMeasure:
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def canonicalize(self) -> "PolarLevyMeasure":
        """Merge atoms that share a direction and an identical radial (weights add).

        Radials are never rescaled; atoms with equal directions but different
        radials stay separate, which represents the same measure.
        """
        tol = get_tolerances().unit
        out: list = []
        for a in self.atoms:
            for k, b in enumerate(out):
                if (b.radial == a.radial and b.xi.shape == a.xi.shape
                        and np.max(np.abs(b.xi - a.xi)) <= tol):
                    out[k] = SphericalAtom(b.xi, b.w + a.w, b.radial)
                    break
            else:
                out.append(a)
        return PolarLevyMeasure(tuple(out))


@dataclass(frozen=True, eq=False)
class LevyTriplet:
    A: np.ndarray
    gamma: np.ndarray
    levy: PolarLevyMeasure = field(default_factory=PolarLevyMeasure)

    def __post_init__(self):
        object.__setattr__(self, "A", _frozen_array(self.A, 2))
        object.__setattr__(self, "gamma", _frozen_array(self.gamma, 1))
        if not isinstance(self.levy, PolarLevyMeasure):
            object.__setattr__(self, "levy", PolarLevyMeasure(tuple(self.levy)))

    @property
    def dim(self) -> int:
        return int(self.gamma.shape[0])

    @classmethod
    def gaussian(cls, A, gamma=None):
        A = np.atleast_2d(np.asarray(A, float))
        g = np.zeros(A.shape[0]) if gamma is None else gamma
        return cls(A, g, PolarLevyMeasure())

    def is_symmetric(self) -> bool:
        """Levy measure invariant under x -> -x (atom by atom)."""
        tol = get_tolerances().unit
        atoms = list(self.levy)
        used = [False] * len(atoms)
        for i, a in enumerate(atoms):
            if used[i]:
                continue
            for j in range(len(atoms)):
                b = atoms[j]
                if (j != i and not used[j] and b.w == a.w and b.radial == a.radial
                        and np.max(np.abs(b.xi + a.xi)) <= tol):
                    used[i] = used[j] = True
                    break
            else:
                return False
        return True


@dataclass
class ValidationReport:
    ok: bool
    issues: list

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "issues": list(self.issues)}


def radial_issues(r: RadialMeasure) -> list:
    """Reasons why ``r`` is not the radial part of a Levy measure (empty if fine)."""
    from .radial import DiracAtom, KClass, PowerLaw, Tabulated, TiltedPowerLaw
    issues = []
    if isinstance(r, PowerLaw) and not r.c > 0:
        issues.append("power_law: c must be positive")
    if isinstance(r, TiltedPowerLaw):
        if not r.c > 0:
            issues.append("tilted: c must be positive")
        if not r.theta > 0:
            issues.append("tilted: theta must be positive")
        if not r.beta < 2:
            issues.append("tilted: beta must be < 2")
    if isinstance(r, DiracAtom):
        if not (r.r0 > 0 and math.isfinite(r.r0)):
            issues.append("dirac: r0 must be positive")
        if not r.mass > 0:
            issues.append("dirac: mass must be positive")
    if isinstance(r, KClass):
        if not r.alpha < 2:
            issues.append("kclass: alpha must be < 2")
    if isinstance(r, (KClass, Tabulated)) or type(r).__name__ == "DilationResidual":
        lo, hi = r.support()
        a = lo if lo > 0 else 1e-6
        b = hi if math.isfinite(hi) else max(1e6, 1e3 * a)
        grid = np.geomspace(a, b, 200)
        dens = r.density(grid[grid < hi] if math.isfinite(hi) else grid)
        if np.any(np.asarray(dens) < -1e-12 * max(1.0, float(np.max(np.abs(dens))))):
            issues.append("negative density")
    if issues:
        return issues
    if r.is_zero():
        issues.append("radial measure is zero")
        return issues
    if math.isinf(r.moment(2.0, "near_zero")):
        issues.append("(r²∧1) integral diverges near 0")
    if math.isinf(r.measure(1.0, math.inf)):
        issues.append("(r²∧1) integral diverges at infinity")
    return issues


def validate_triplet(t: LevyTriplet) -> ValidationReport:
    tol = get_tolerances()
    issues = []
    d = t.gamma.shape[0] if t.gamma.ndim == 1 else -1
    A = t.A
    if A.shape != (d, d):
        issues.append(f"A has shape {A.shape}, expected ({d}, {d})")
    else:
        scale = float(np.max(np.abs(A))) if A.size else 0.0
        if np.max(np.abs(A - A.T), initial=0.0) > tol.psd * max(scale, 1e-300):
            issues.append("A is not symmetric")
        elif d and float(np.linalg.eigvalsh(0.5 * (A + A.T)).min()) < -tol.psd * scale:
            issues.append("A is not positive semidefinite")
    if not np.all(np.isfinite(t.gamma)):
        issues.append("gamma is not finite")
    for i, a in enumerate(t.levy):
        if a.xi.shape != (d,):
            issues.append(f"atom {i}: direction has dimension {a.xi.shape[0]}, expected {d}")
            continue
        if abs(float(np.linalg.norm(a.xi)) - 1.0) > tol.unit:
            issues.append(f"atom {i}: direction is not a unit vector")
        if not a.w > 0:
            issues.append(f"atom {i}: weight must be positive")
        for msg in radial_issues(a.radial):
            issues.append(f"atom {i}: {msg}")
    return ValidationReport(not issues, issues)


# ---------------------------------------------------------------------------
# characteristic exponent

def radial_exponent(nu: RadialMeasure, s: float, tol=None) -> complex:
    """``int (e^{irs} - 1 - irs/(1+r^2)) nu(dr)``."""
    if s == 0.0:
        return 0j
    tol = get_tolerances().quad if tol is None else tol
    re = im = 0.0
    for r0, w in nu.atoms():
        x = r0 * s
        re += w * (-2.0 * math.sin(0.5 * x) ** 2)
        im += w * (math.sin(x) - x / (1.0 + r0 * r0))
    if not nu.has_density or nu.is_zero():
        return complex(re, im)
    lo, hi = nu.support()
    a = abs(s)
    R = OSC / a
    rho = nu.rho
    bps = nu.breakpoints()
    pts = (*bps, 1.0 / a)
    top = min(R, hi)
    if top > lo:
        re += integrate_log(lambda r: -2.0 * math.sin(0.5 * r * s) ** 2 * rho(r),
                            lo, top, points=pts, tol=tol)
        im += integrate_log(lambda r: (sin_minus_x(r * s) + r * s * r * r / (1.0 + r * r)) * rho(r),
                            lo, top, points=pts, tol=tol)
    if hi > R:
        start = max(R, lo)
        cuts = [start, *sorted(b for b in bps if start < b < hi), hi]
        sgn = 1.0 if s > 0 else -1.0
        cos_part = sin_part = 0.0
        for u, v in zip(cuts[:-1], cuts[1:]):
            cos_part += quad(rho, u, v, tol=tol, weight="cos", wvar=a)
            sin_part += quad(rho, u, v, tol=tol, weight="sin", wvar=a)
        mass = nu.measure(start, hi)
        drift = integrate_log(lambda r: r * rho(r) / (1.0 + r * r), start, hi, points=bps, tol=tol)
        re += cos_part - mass
        im += sgn * sin_part - s * drift
    return complex(re, im)


def char_exponent(t: LevyTriplet, z) -> complex:
    """log of the characteristic function at ``z``, continuous in z."""
    z = np.asarray(z, float).reshape(-1)
    if z.shape != (t.dim,):
        raise ValueError(f"z has dimension {z.shape[0]}, triplet has {t.dim}")
    val = complex(-0.5 * float(z @ t.A @ z), float(t.gamma @ z))
    for a in t.levy:
        s = float(a.xi @ z)
        if s != 0.0:
            val += a.w * radial_exponent(a.radial, s)
    return val


def char_exponents(t: LevyTriplet, zs) -> np.ndarray:
    """Vectorised ``char_exponent`` over the rows of ``zs`` (or a 1-d grid when dim = 1)."""
    zs = np.asarray(zs, float)
    if zs.ndim == 1 and t.dim == 1:
        zs = zs[:, None]
    return np.array([char_exponent(t, z) for z in zs])


# ---------------------------------------------------------------------------
# measure-level helpers

def radial_moment(r: RadialMeasure, delta: float, region: str = "full") -> float:
    return r.moment(delta, region)


def log_moment(r: RadialMeasure, k: int) -> float:
    """``int_1^inf log(r)^k nu(dr)``."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    return r.moment(0.0, "tail", int(k))


def measure_of_annulus(t: LevyTriplet, index: int, r_lo: float, r_hi: float) -> float:
    """``w_i nu_i((r_lo, r_hi])``."""
    if not (0 <= r_lo < r_hi):
        raise ValueError("need 0 <= r_lo < r_hi")
    a = t.levy.atoms[index]
    return a.w * a.radial.measure(r_lo, r_hi)
