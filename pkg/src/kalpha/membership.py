"""Membership in K_alpha and the decomposition mu^(z) = mu^(cz)^(c^-alpha) mu_c^(z).

A radial density r^(-alpha-1) ell(r) puts the law in K_alpha when every
ell is nonincreasing with limit 0 at infinity.  Parametric families are
decided analytically; everything else on geometric grids, and such verdicts
mean "consistent at grid resolution", not proof.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from .centering import J
from .errors import NotInClass
from .radial import (DiracAtom, DilationResidual, KClass, PowerLaw, RadialMeasure,
                     Tabulated, TiltedPowerLaw)
from .triplet import (LevyTriplet, PolarLevyMeasure, SphericalAtom, char_exponent,
                      validate_triplet)

GRID_POINTS = 200


@dataclass
class MembershipReport:
    member: bool
    level_alpha: float
    atom_verdicts: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.member

    def __bool__(self):
        return self.member

    def to_dict(self):
        return {"member": bool(self.member), "level_alpha": self.level_alpha,
                "atom_verdicts": list(self.atom_verdicts), "witnesses": dict(self.witnesses)}


# ---------------------------------------------------------------------------
# grids

def _grid_span(r: RadialMeasure):
    lo, hi = r.support()
    pts = [p for p in (*r.breakpoints(), lo, hi, 1.0) if 0 < p < math.inf]
    a = lo if lo > 0 else min(pts) * 1e-3
    b = hi if math.isfinite(hi) else max(pts) * 1e3
    return a, b


def _grid(a, b, breaks=(), n=GRID_POINTS):
    g = set(np.geomspace(a, b, n).tolist())
    for x in breaks:
        if a < x < b:
            g.update((x * (1 - 1e-9), x))
    return np.array(sorted(g))


def _check_nonincreasing(vals):
    """Largest violation of nonnegativity / nonincreasingness, relative to max |vals|."""
    scale = float(np.max(np.abs(vals))) if len(vals) else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        return (0.0, 0.0) if scale == 0.0 else (math.inf, math.inf)
    neg = max(0.0, -float(np.min(vals))) / scale
    rise = max(0.0, float(np.max(np.diff(vals)))) / scale
    return neg, rise


def _ell_grid_verdict(r: RadialMeasure, alpha: float, vanishes: bool):
    tol = get_tolerances().mono
    a, b = _grid_span(r)
    lo, hi = r.support()
    g = _grid(a, b, r.breakpoints())
    if math.isfinite(hi):
        g = g[g < hi]
    ell = g ** (alpha + 1) * np.asarray(r.density(g), float)
    neg, rise = _check_nonincreasing(ell)
    ok = neg <= tol and rise <= tol
    reasons = []
    if neg > tol:
        reasons.append("ℓ is negative somewhere")
    if rise > tol:
        reasons.append("ℓ is not nonincreasing")
    if not vanishes:
        reasons.append("ℓ does not vanish at ∞")
    return {"member": ok and vanishes, "method": "grid",
            "reason": "; ".join(reasons) or "ℓ nonincreasing on grid and vanishing at ∞",
            "grid": [float(a), float(b), int(len(g))],
            "max_negative": neg, "max_rise": rise}


def _tail_vanishes(r: RadialMeasure, alpha: float) -> bool:
    lo, hi = r.support()
    if math.isfinite(hi):
        return True
    p = r.tail_power()
    if p is None:
        return True
    e = p + alpha + 1  # ell ~ r^e (times logs)
    if e < -1e-12:
        return True
    if e > 1e-12:
        return False
    if isinstance(r, KClass) and r.spline is not None:
        return r.spline.shifted_power(alpha - r.alpha).limit_at_inf() == 0.0
    return False


def atom_verdict(r: RadialMeasure, alpha: float) -> dict:
    """K_alpha verdict for one radial component."""
    if r.atoms():
        return {"member": False, "method": "analytic",
                "reason": "radial measure not absolutely continuous"}
    if r.is_zero():
        return {"member": True, "method": "analytic", "reason": "zero radial measure"}
    if isinstance(r, PowerLaw):
        # ell(r) = c r^(alpha - beta)
        if r.beta > alpha:
            return {"member": True, "method": "analytic", "reason": "β > α: ℓ = c r^(α-β) decreases to 0"}
        if r.beta == alpha:
            return {"member": False, "method": "analytic", "reason": "ℓ does not vanish at ∞"}
        return {"member": False, "method": "analytic", "reason": "ℓ is increasing (β < α)"}
    if isinstance(r, TiltedPowerLaw):
        if r.beta >= alpha:
            return {"member": True, "method": "analytic", "reason": "β ≥ α: ℓ = c r^(α-β) e^(-θr) decreasing"}
        return {"member": False, "method": "analytic", "reason": "ℓ increases near 0 (β < α)"}
    if isinstance(r, KClass) and r.ell.known_monotone and alpha <= r.alpha:
        if r.ell.limit_at_inf() == 0.0 or alpha < r.alpha:
            return {"member": True, "method": "analytic",
                    "reason": "ℓ nonincreasing by construction and α ≤ class level"}
    return _ell_grid_verdict(r, alpha, _tail_vanishes(r, alpha))


def is_k_alpha(t: LevyTriplet, alpha: float) -> MembershipReport:
    if not alpha < 2:
        raise ValueError("alpha must be < 2")
    verdicts = []
    for i, a in enumerate(t.levy):
        v = atom_verdict(a.radial, alpha)
        v["index"] = i
        verdicts.append(v)
    member = all(v["member"] for v in verdicts)
    w = {"levy_measure": "zero" if not verdicts else f"{len(verdicts)} atoms"}
    return MembershipReport(member, float(alpha), verdicts, w)


# ---------------------------------------------------------------------------
# decomposition

@dataclass(frozen=True, eq=False)
class DecompositionFactor:
    c: float
    alpha: float
    a_c: np.ndarray
    mu_c: LevyTriplet
    extended: bool = False

    def to_dict(self):
        from .serialization import triplet_to_dict
        return {"c": self.c, "alpha": self.alpha, "a_c": self.a_c.tolist(),
                "extended": self.extended, "mu_c": triplet_to_dict(self.mu_c)}


def factor_radial(r: RadialMeasure, alpha: float, c: float) -> RadialMeasure:
    """Radial density ``rho(u) - c^(-alpha-1) rho(u/c)``."""
    if isinstance(r, PowerLaw):
        return PowerLaw(r.c * (1.0 - c ** (r.beta - alpha)), r.beta)
    return DilationResidual(r, alpha, c)


def factor_decomposition(t: LevyTriplet, alpha: float, c: float) -> DecompositionFactor:
    """Cofactor mu_c with mu^(z) = mu^(cz)^(c^-alpha) mu_c^(z).

    The construction is the classical one for alpha < 0; 0 <= alpha < 2 is
    accepted and flagged ``extended``.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    if not alpha < 2:
        raise ValueError("alpha must be < 2")
    rep = is_k_alpha(t, alpha)
    if not rep.member:
        bad = "; ".join(f"atom {v['index']}: {v['reason']}" for v in rep.atom_verdicts if not v["member"])
        raise NotInClass(f"not in K_{alpha:g}: {bad}")
    A_c = (1.0 - c ** (2.0 - alpha)) * t.A
    a_c = np.zeros(t.dim)
    atoms = []
    for a in t.levy:
        # a_c = sum w xi c^(1-alpha) int v (1/(1+c^2v^2) - 1/(1+v^2)) nu(dv) = -sum w xi c^(1-alpha) J(c)
        a_c = a_c - a.w * c ** (1.0 - alpha) * J(a.radial, c) * a.xi
        atoms.append(SphericalAtom(a.xi, a.w, factor_radial(a.radial, alpha, c)))
    gamma_c = (1.0 - c ** (1.0 - alpha)) * t.gamma - a_c
    mu_c = LevyTriplet(A_c, gamma_c, PolarLevyMeasure(tuple(atoms)))
    return DecompositionFactor(float(c), float(alpha), a_c, mu_c, extended=alpha >= 0)


def verify_decomposition(t: LevyTriplet, factor: DecompositionFactor, z_grid) -> float:
    """max over z of |psi(z) - c^(-alpha) psi(cz) - psi_c(z)|."""
    c, alpha = factor.c, factor.alpha
    zs = np.asarray(z_grid, float)
    if zs.ndim == 1:
        zs = zs[:, None] if t.dim == 1 else zs[None, :]
    worst = 0.0
    for z in zs:
        r = char_exponent(t, z) - c ** (-alpha) * char_exponent(t, c * z) - char_exponent(factor.mu_c, z)
        worst = max(worst, abs(r))
    return worst


# ---------------------------------------------------------------------------
# diagnostics

@dataclass
class ConvexityDiagnostic:
    x: np.ndarray
    H: np.ndarray
    second_differences: np.ndarray
    convex: bool
    non_smooth: bool

    def to_dict(self):
        return {"x": self.x.tolist(), "H": self.H.tolist(),
                "second_differences": self.second_differences.tolist(),
                "convex": self.convex, "non_smooth": self.non_smooth}


def h_convexity_diagnostic(r: RadialMeasure, alpha: float, n: int = GRID_POINTS) -> ConvexityDiagnostic:
    """H(x) = int_{e^-x}^inf r^alpha nu(dr) on a uniform x grid; convex for K_alpha members."""
    tol = get_tolerances()
    a, b = _grid_span(r)
    if r.atoms():
        r0s = [p for p, _ in r.atoms()]
        a, b = min(a, min(r0s) / 10), max(b, max(r0s) * 10)
    x = np.linspace(-math.log(b), -math.log(a), n)
    H = np.array([r.moment(alpha, (math.exp(-xi), math.inf)) for xi in x])
    if not np.all(np.isfinite(H)):
        raise ValueError("H is infinite on the grid: tail moment of order alpha diverges")
    d2 = H[2:] - 2 * H[1:-1] + H[:-2]
    scale = float(np.max(np.abs(H))) if H.size else 0.0
    convex = bool(np.all(d2 >= -(tol.mono * scale + 10 * tol.quad)))
    return ConvexityDiagnostic(x, H, d2, convex, bool(r.atoms()))


def monotone_order_check(h, m: int, domain=None, n: int = GRID_POINTS, tol=None) -> dict:
    """Grid test that (-1)^k h^(k) >= 0 for k = 0..m via divided differences.

    ``domain`` is (lo, hi) for the geometric grid, default (1e-4, 1e4).
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    tol = get_tolerances().mono if tol is None else tol
    lo, hi = (1e-4, 1e4) if domain is None else domain
    x = np.geomspace(lo, hi, n)
    f = np.asarray(h(x), float)
    worst = {}
    ok = True
    dd = f.copy()
    mag = np.abs(f)
    for k in range(m + 1):
        if k > 0:
            span = x[k:] - x[:-k]
            dd = (dd[1:] - dd[:-1]) / span
            mag = (mag[1:] + mag[:-1]) / span
        signed = (-1) ** k * dd
        slack = tol * mag + 1e-300
        viol = float(np.max(-signed / slack)) if signed.size else 0.0
        worst[k] = viol
        if viol > 1.0:
            ok = False
    return {"consistent": ok, "order": m, "grid": [float(lo), float(hi), n],
            "worst_violation_ratio": {str(k): v for k, v in worst.items()},
            "note": "necessary condition at grid resolution"}
