"""The mapping Phi_alpha^(m+1) as an exact transform of triplets.

    A~      = (2 - alpha)^-(m+1) A
    nu~(B)  = int_0^1 g(s) nu(s^-1 B) ds,   g = s^(-alpha-1) log(1/s)^m / m!
    radial  : density u^(-alpha-1) h(u),   h(u) = (1/m!) int_u^inf log(r/u)^m r^alpha nu(dr)
    gamma~  = int_0^1 g~(s) [gamma - J(s)] ds,   g~ = s^(-alpha) log(1/s)^m / m!

For alpha >= 1 the drift integral needs the zero-mean identity and, at
alpha = 1, a limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._config import get_tolerances
from .centering import I3, J, as_power_law, power_constant
from .ell import (LogFactor, PowerLogSpline, PowerTail, Pushforward, StepDown,
                  _merge_terms, log_power_antideriv, log_power_terms)
from .errors import DomainViolation, LimitNonConvergence
from .kernels import MappingParams
from .membership import MembershipReport, is_k_alpha, monotone_order_check
from .quad import integrate_log, quad
from .radial import DiracAtom, KClass, RadialMeasure, Tabulated
from .triplet import LevyTriplet, PolarLevyMeasure, SphericalAtom, validate_triplet

K_DOUBLINGS = 40
RATIO = 0.75
STREAK = 5
_Q_UNSTABLE = 1e-3   # 0 < |q| below this makes the closed-form spline map ill-conditioned


def _params(p) -> MappingParams:
    if isinstance(p, MappingParams):
        return p
    if isinstance(p, dict):
        return MappingParams(p["alpha"], p.get("m", 0))
    a, m = p
    return MappingParams(a, m)


# ---------------------------------------------------------------------------
# dyadic limits

@dataclass
class DyadicLimit:
    value: np.ndarray
    deltas: list
    converged: bool
    steps: int


def dyadic_limit(increment, K=K_DOUBLINGS, tol=None) -> DyadicLimit:
    """Sum increments k = 1, 2, ... until Cauchy acceptance.

    Accepted once the increment norm is below ``tol`` and shrinks by a ratio
    < 0.75 (or is exactly zero) for five consecutive steps.
    """
    tol = get_tolerances().limit if tol is None else tol
    total = None
    deltas = []
    streak = 0
    prev = None
    for k in range(1, K + 1):
        inc = np.atleast_1d(np.asarray(increment(k), float))
        total = inc.copy() if total is None else total + inc
        d = float(np.linalg.norm(inc))
        deltas.append(d)
        good = d == 0.0 or (d < tol and prev is not None and prev > 0 and d / prev < RATIO)
        streak = streak + 1 if good else 0
        prev = d
        if streak >= STREAK:
            return DyadicLimit(total, deltas, True, k)
    return DyadicLimit(total, deltas, False, K)


# ---------------------------------------------------------------------------
# domain

@dataclass
class DomainReport:
    in_domain: bool
    required_condition: str
    witnesses: dict = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.in_domain

    def to_dict(self):
        return {"in_domain": self.in_domain, "required_condition": self.required_condition,
                "witnesses": self.witnesses, "reason": self.reason}


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def mean_vector(t: LevyTriplet) -> np.ndarray:
    """gamma + sum w xi int r^3/(1+r^2) nu(dr); infinite entries when the mean does not exist."""
    m = t.gamma.astype(float).copy()
    for a in t.levy:
        v = I3(a.radial, 1.0)
        if math.isinf(v):
            return np.full(t.dim, math.inf)
        m = m + a.w * v * a.xi
    return m


def _zero_mean(t: LevyTriplet):
    mv = mean_vector(t)
    if not np.all(np.isfinite(mv)):
        return False, mv, math.inf
    scale = max(1.0, float(np.linalg.norm(t.gamma)))
    for a in t.levy:
        scale = max(scale, a.w * abs(I3(a.radial, 1.0)))
    return float(np.linalg.norm(mv)) <= get_tolerances().mean * scale, mv, scale


def _tail_limit(t: LevyTriplet, m: int) -> dict:
    """Convergence of s_T = int_1^T t^-1 dt sum w xi int_{r>t} r log(r/t)^m nu(dr) as T -> inf."""
    if t.is_symmetric():
        return {"converged": True, "method": "symmetric: inner integral ≡ 0", "deltas": []}

    def inc(k):
        a, b = 2.0 ** (k - 1), 2.0 ** k
        out = np.zeros(t.dim)
        for at in t.levy:
            # int_a^b t^-1 log(r/t)^m dt = [log(r/a)^(m+1) - log+(r/b)^(m+1)] / (m+1)
            def f(r):
                hi = math.log(r / b) if r > b else 0.0
                return r * (math.log(r / a) ** (m + 1) - hi ** (m + 1)) / (m + 1)
            out = out + at.w * at.radial.integrate(f, a, math.inf, points=(b,)) * at.xi
        return out

    lim = dyadic_limit(inc)
    rep = {"converged": lim.converged, "method": "dyadic Cauchy", "deltas": lim.deltas,
           "value": lim.value.tolist()}
    if not lim.converged:
        # absolute convergence of the tail integral settles existence
        mom = [at.radial.moment(1.0, "tail", m + 1) for at in t.levy]
        if all(math.isfinite(x) for x in mom):
            rep.update(converged=True, method="absolutely convergent: r log(r)^(m+1) tail moment finite")
    return rep


def check_domain(t: LevyTriplet, p) -> DomainReport:
    p = _params(p)
    a, m = p.alpha, p.m
    atoms = list(t.levy)
    if a < 0:
        return DomainReport(True, "none", {}, "alpha < 0: every infinitely divisible law")
    if a == 0:
        mom = [at.radial.moment(0.0, "tail", m + 1) for at in atoms]
        ok = all(math.isfinite(x) for x in mom)
        return DomainReport(ok, "log_moment", {"log_moments": [_jsonable(x) for x in mom], "order": m + 1},
                            "" if ok else "log-moment of order m+1 diverges")
    mom = [at.radial.moment(a, "tail", m) for at in atoms]
    mom_ok = all(math.isfinite(x) for x in mom)
    w = {"alpha_moments": [_jsonable(x) for x in mom], "log_power": m}
    cond = "alpha_moment" if m == 0 else "alpha_log_moment"
    if a < 1:
        return DomainReport(mom_ok, cond, w, "" if mom_ok else "tail moment of order alpha diverges")
    if not mom_ok:
        return DomainReport(False, "alpha1_limit" if a == 1 else "zero_mean", w,
                            "tail moment of order alpha diverges")
    zm, mv, _ = _zero_mean(t)
    w["mean"] = [_jsonable(float(x)) for x in mv]
    if a > 1:
        return DomainReport(zm, "zero_mean", w, "" if zm else "mean is not zero")
    w["tail_limit"] = _tail_limit(t, m)
    ok = zm and w["tail_limit"]["converged"]
    reason = "" if ok else ("mean is not zero" if not zm else "tail limit does not converge")
    return DomainReport(ok, "alpha1_limit", w, reason)


# ---------------------------------------------------------------------------
# components

def map_gaussian(A, p) -> np.ndarray:
    p = _params(p)
    return (2.0 - p.alpha) ** (-(p.m + 1)) * np.asarray(A, float)


def _map_spline(spline: PowerLogSpline, alpha0: float, p: MappingParams):
    """h(u) = (1/m!) int_u^inf log(r/u)^m r^(alpha-alpha0-1) spline(r) dr as a spline in u,
    or None when an exponent sits too close to zero for the closed form."""
    a, m = p.alpha, p.m
    fm = math.factorial(m)
    edges = spline.edges
    pieces = [[(c, q + a - alpha0, n) for c, q, n in terms] for terms in spline.pieces]
    for terms in pieces:
        for c, Q, n in terms:
            if 1e-12 < abs(Q) < _Q_UNSTABLE:
                return None
    for c, Q, n in pieces[-1]:
        if Q >= -1e-12:
            raise DomainViolation("tail moment of order alpha diverges")

    def P(Q, N, r):
        return log_power_antideriv(Q, N, r)

    K = len(pieces)
    # full-piece integrals F[i][k] = sum_T c (P(e_{i+1}) - P(e_i)) for power n+k
    full = [[0.0] * (m + 1) for _ in range(K)]
    upper = [[0.0] * (m + 1) for _ in range(K)]
    for i, terms in enumerate(pieces):
        lo, hi = edges[i], edges[i + 1]
        for k in range(m + 1):
            up = sum(c * P(Q, n + k, hi) for c, Q, n in terms)
            upper[i][k] = up
            if lo > 0:
                full[i][k] = up - sum(c * P(Q, n + k, lo) for c, Q, n in terms)
    out = []
    for i in range(K):
        terms = []
        for k in range(m + 1):
            const = upper[i][k] + sum(full[j][k] for j in range(i + 1, K))
            coef = math.comb(m, k) * (-1) ** (m - k) / fm
            terms.append((coef * const, 0.0, m - k))
            for c, Q, n in pieces[i]:
                for cf, q2, n2 in log_power_terms(Q, n + k):
                    terms.append((-coef * c * cf, q2, n2 + m - k))
        out.append(_merge_terms(terms))
    return PowerLogSpline(spline.breaks, tuple(out), True)


def map_radial(r: RadialMeasure, p) -> KClass | None:
    """Image radial component, a KClass at level alpha (None for the zero measure)."""
    p = _params(p)
    a, m = p.alpha, p.m
    if r.is_zero():
        return None
    if math.isinf(r.moment(a, "tail", m)):
        raise DomainViolation(f"tail moment r^{a:g} log(r)^{m} diverges")
    pl = as_power_law(r)
    if pl is not None:
        if not pl.beta > a:
            raise DomainViolation("power law needs beta > alpha")
        return KClass(a, PowerTail(pl.c / (pl.beta - a) ** (m + 1), pl.beta - a))
    if isinstance(r, DiracAtom):
        v = r.mass * r.r0 ** a
        if m == 0:
            return KClass(a, StepDown((r.r0,), (v, 0.0)))
        return KClass(a, LogFactor(StepDown((), (v / math.factorial(m),)), m, r.r0))
    spline, a0 = None, None
    if isinstance(r, KClass) and r.spline is not None:
        spline, a0 = r.spline, r.alpha
    elif isinstance(r, Tabulated):
        spline, a0 = r.spline, -1.0
    if spline is not None:
        h = _map_spline(spline, a0, p)
        if h is not None:
            return KClass(a, h)
    return KClass(a, Pushforward(r, a, m))


def _gtilde(p):
    fm = math.factorial(p.m)
    return lambda s: s ** (-p.alpha) * math.log(1.0 / s) ** p.m / fm


def _centering_image(nu: KClass) -> float:
    """int r^3/(1+r^2) nu~(dr) for an image radial."""
    v = I3(nu, 1.0)
    if math.isinf(v):
        raise DomainViolation("image measure has no first moment")
    return v


def map_gamma(t: LevyTriplet, p) -> np.ndarray:
    p = _params(p)
    a, m = p.alpha, p.m
    fm = math.factorial(m)
    atoms = list(t.levy)
    if a < 1:
        out = (1.0 - a) ** (-(m + 1)) * t.gamma.astype(float)
        gt = _gtilde(p)
        for at in atoms:
            nu = at.radial
            if nu.is_zero():
                continue
            pts = tuple(1.0 / b for b in nu.breakpoints() if b > 1.0)
            K = integrate_log(lambda s: gt(s) * J(nu, s), 0.0, 1.0, points=pts)
            out = out - at.w * K * at.xi
        return out
    zm, mv, _ = _zero_mean(t)
    if not zm:
        raise DomainViolation(f"alpha = {a:g} needs zero mean; mean is {mv.tolist()}")
    if a > 1:
        out = np.zeros(t.dim)
        for at in atoms:
            img = map_radial(at.radial, p)
            if img is not None:
                out = out - at.w * _centering_image(img) * at.xi
        return out
    # alpha = 1
    if t.is_symmetric():
        return np.zeros(t.dim)

    def f(nu, s):
        return -s * math.log(1.0 / s) ** m / fm * I3(nu, s)

    def inc(k):
        lo, hi = 2.0 ** (-k), 2.0 ** (-k + 1)
        out = np.zeros(t.dim)
        for at in atoms:
            out = out + at.w * quad(lambda s: f(at.radial, s), lo, hi) * at.xi
        return out

    lim = dyadic_limit(inc)
    if lim.converged:
        return lim.value
    if all(math.isfinite(at.radial.moment(1.0, "tail", m + 1)) for at in atoms):
        out = np.zeros(t.dim)
        for at in atoms:
            out = out + at.w * integrate_log(lambda s: f(at.radial, s), 0.0, 1.0) * at.xi
        return out
    raise LimitNonConvergence(f"drift limit did not settle in {K_DOUBLINGS} doublings; "
                              f"last increments {lim.deltas[-3:]}")


def apply_phi(t: LevyTriplet, p) -> LevyTriplet:
    p = _params(p)
    rep = check_domain(t, p)
    if not rep.in_domain:
        raise DomainViolation(f"not in the domain of Phi_{p.alpha:g}^{p.m + 1}: {rep.reason}")
    atoms = []
    for at in t.levy:
        img = map_radial(at.radial, p)
        if img is not None:
            atoms.append(SphericalAtom(at.xi, at.w, img))
    return LevyTriplet(map_gaussian(t.A, p), map_gamma(t, p), PolarLevyMeasure(tuple(atoms)))


# ---------------------------------------------------------------------------
# range

def _psi_m(m):
    """Coefficients of P with ((d/dx) x)^m [x/(1+x^2)^2] = x P(x^2) / (1+x^2)^(m+2)."""
    P = np.polynomial.Polynomial([1.0])
    k = 2
    y1 = np.polynomial.Polynomial([1.0, 1.0])
    y = np.polynomial.Polynomial([0.0, 1.0])
    for _ in range(m):
        # E[x P/(1+y)^k] = x/(1+y)^(k+1) [2P(1+y) + 2yP'(1+y) - 2kyP]
        P = 2 * P * y1 + 2 * y * P.deriv() * y1 - 2 * k * y * P
        k += 1
    return P, k


def _alpha1_drift_limit(t: LevyTriplet, m: int) -> DyadicLimit:
    """-lim (2/m!) int_eps^1 log(1/t)^m dt sum w xi int h(r) psi_m(tr) dr, with h = u^2 rho~.

    This is the drift of Phi_1^(m+1) written through the image factor h alone.
    """
    P, k = _psi_m(m)
    fm = math.factorial(m)

    def psi(x):
        y = x * x
        return x * P(y) / (1.0 + y) ** k

    def inner(at, s):
        nu = at.radial
        return nu.integrate(lambda r: r * r * psi(s * r), points=(1.0 / s,))

    def inc(kk):
        lo, hi = 2.0 ** (-kk), 2.0 ** (-kk + 1)
        out = np.zeros(t.dim)
        for at in t.levy:
            v = quad(lambda s: math.log(1.0 / s) ** m * inner(at, s), lo, hi)
            out = out - 2.0 / fm * at.w * v * at.xi
        return out

    return dyadic_limit(inc)


def range_check(t: LevyTriplet, p) -> MembershipReport:
    """Is ``t`` consistent with lying in the range of Phi_alpha^(m+1)?"""
    p = _params(p)
    a, m = p.alpha, p.m
    val = validate_triplet(t)
    if not val.ok:
        return MembershipReport(False, a, [], {"invalid": val.issues})
    rep = is_k_alpha(t, a)
    w = dict(rep.witnesses)
    verdicts = rep.atom_verdicts
    member = rep.member
    if m >= 1:
        for v, at in zip(verdicts, t.levy):
            nu = at.radial
            if nu.atoms():
                continue
            lo, hi = nu.support()
            from .membership import _grid_span
            g_lo, g_hi = _grid_span(nu)
            chk = monotone_order_check(lambda u: u ** (a + 1) * np.asarray(nu.density(u), float),
                                       m, (g_lo, min(g_hi, hi) if math.isfinite(hi) else g_hi))
            v["m_monotone"] = chk
            if not chk["consistent"]:
                v["member"] = False
                v["reason"] = (v.get("reason", "") + "; h is not m-times monotone").lstrip("; ")
                member = False
    if a == 1 and member:
        if not t.levy.atoms:
            ok = float(np.linalg.norm(t.gamma)) <= get_tolerances().mean
            w["alpha1_drift"] = {"gaussian": True, "gamma_zero": ok}
            member = member and ok
        else:
            lim = _alpha1_drift_limit(t, m)
            scale = max(1.0, float(np.linalg.norm(t.gamma)))
            diff = float(np.linalg.norm(lim.value - t.gamma))
            ok = lim.converged and diff <= 1e3 * get_tolerances().limit * scale
            w["alpha1_drift"] = {"limit": lim.value.tolist(), "converged": lim.converged,
                                 "deltas": lim.deltas, "difference": diff}
            member = member and ok
    if 1 < a < 2 and member:
        zm, mv, _ = _zero_mean(t)
        w["mean"] = [_jsonable(float(x)) for x in mv]
        member = member and zm
    return MembershipReport(member, a, verdicts, w)
