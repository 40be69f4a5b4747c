import math

import mpmath as mp
import numpy as np
import pytest

from conftest import member_fixtures, one_atom, symmetric
from kalpha import (DiracAtom, ExpTail, KClass, LevyTriplet, NotInClass, PowerLaw, PowerTail,
                    StepDown, Tabulated, TiltedPowerLaw, factor_decomposition,
                    h_convexity_diagnostic, is_k_alpha, monotone_order_check,
                    verify_decomposition)

Z = np.linspace(-5, 5, 21)


def test_power_law_membership():
    assert is_k_alpha(one_atom(PowerLaw(1.0, 0.7)), 0.5).member
    rep = is_k_alpha(one_atom(PowerLaw(1.0, 0.5)), 0.5)
    assert not rep.member and rep.atom_verdicts[0]["reason"] == "ℓ does not vanish at ∞"
    assert not is_k_alpha(one_atom(PowerLaw(1.0, 0.5)), 0.9).member


def test_tilted_membership():
    nu = TiltedPowerLaw(1.0, 0.5, 2.0)
    assert is_k_alpha(one_atom(nu), 0.5).member
    assert is_k_alpha(one_atom(nu), -1.0).member
    assert not is_k_alpha(one_atom(nu), 0.8).member


def test_dirac_is_not_a_member(dirac):
    rep = is_k_alpha(dirac, -1.0)
    assert not rep.member
    assert rep.atom_verdicts[0]["reason"] == "radial measure not absolutely continuous"


def test_gaussian_is_a_member():
    assert is_k_alpha(LevyTriplet.gaussian(np.eye(2)), 1.5).member


def test_grid_verdict_on_tabulated():
    r = np.geomspace(0.01, 100, 60)
    dec = Tabulated(tuple(r), tuple(r ** -1.5 * np.exp(-r)))
    assert is_k_alpha(one_atom(dec), 0.0).member
    bump = Tabulated(tuple(r), tuple(r ** -1.0 * (1 + np.exp(-(np.log(r) - 1) ** 2))))
    rep = is_k_alpha(one_atom(bump), 0.0)
    assert not rep.member and "not nonincreasing" in rep.atom_verdicts[0]["reason"]


def test_kclass_step_member_at_lower_levels():
    t = one_atom(KClass(0.0, StepDown((0.5, 2.0), (2.0, 1.0, 0.0))))
    for a in (-2.0, -1.0, -0.3, 0.0):
        assert is_k_alpha(t, a).member
    assert not is_k_alpha(t, 0.5).member


@pytest.mark.parametrize("name,t,level", member_fixtures(), ids=[f[0] for f in member_fixtures()])
def test_nesting(name, t, level):
    # K_beta is contained in K_alpha for alpha < beta
    for a in (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5):
        if a <= level:
            assert is_k_alpha(t, a).member


def test_alpha_two_rejected():
    with pytest.raises(ValueError):
        is_k_alpha(one_atom(PowerLaw(1.0, 0.5)), 2.0)


# ---------------------------------------------------------------------------
# decomposition

def mp_a_c(rho, c, alpha, pts=()):
    """c^(1-alpha) int v (1/(1+c^2 v^2) - 1/(1+v^2)) rho(v) dv in x = log v."""
    with mp.workdps(25):
        c = mp.mpf(c)
        f = lambda x: (lambda v: v * v * (1 / (1 + c * c * v * v) - 1 / (1 + v * v)) * rho(v))(mp.exp(x))  # noqa: E731
        xs = sorted({-200, -10, 0, 10, 200, *(math.log(p) for p in pts)})
        return float(c ** (1 - alpha) * mp.quad(f, xs))


@pytest.mark.parametrize("c", [0.1, 0.5, 0.9])
def test_factor_drift_against_quadrature(c):
    alpha = -1.0
    cases = [
        (TiltedPowerLaw(2.0, 0.5, 1.5), lambda v: 2 * v ** -1.5 * mp.exp(-1.5 * v), ()),
        (KClass(-0.5, ExpTail(1.0, 1.0)), lambda v: v ** -0.5 * mp.exp(-v), ()),
        (PowerLaw(1.0, 0.7), lambda v: v ** -1.7, ()),
    ]
    for nu, rho, pts in cases:
        f = factor_decomposition(one_atom(nu, w=0.5), alpha, c)
        assert f.a_c[0] == pytest.approx(0.5 * mp_a_c(rho, c, alpha, pts), rel=1e-9)


def test_symmetric_factor_drift_vanishes():
    f = factor_decomposition(symmetric(TiltedPowerLaw(1.0, 0.5, 1.0)), -1.0, 0.5)
    assert abs(f.a_c[0]) <= 1e-14


def test_constant_ell_not_in_class():
    # PowerLaw with beta = alpha has ell constant
    with pytest.raises(NotInClass):
        factor_decomposition(one_atom(PowerLaw(1.0, 0.5)), 0.5, 0.5)
    with pytest.raises(NotInClass):
        factor_decomposition(one_atom(DiracAtom(1.0, 1.0)), -1.0, 0.5)


def test_factor_argument_checks():
    t = one_atom(PowerLaw(1.0, 0.7))
    for c in (0.0, 1.0, -0.5):
        with pytest.raises(ValueError):
            factor_decomposition(t, -1.0, c)


@pytest.mark.parametrize("name,t,level", member_fixtures(), ids=[f[0] for f in member_fixtures()])
@pytest.mark.parametrize("c", [0.1, 0.5, 0.9, 0.999])
def test_decomposition_identity(name, t, level, c):
    z = Z[:, None] * np.ones(t.dim) / math.sqrt(t.dim)
    for a in (-1.5, -0.5):
        f = factor_decomposition(t, a, c)
        assert not f.extended
        assert verify_decomposition(t, f, z) <= 1e-7


def test_extended_decomposition_flagged():
    t = one_atom(TiltedPowerLaw(1.0, 0.5, 1.0))
    f = factor_decomposition(t, 0.3, 0.5)
    assert f.extended
    assert verify_decomposition(t, f, Z) <= 1e-7


def test_corrupted_factor_detected():
    t = one_atom(TiltedPowerLaw(1.0, 0.5, 1.0))
    f = factor_decomposition(t, -1.0, 0.5)
    bad = LevyTriplet(f.mu_c.A, f.mu_c.gamma + 1.0, f.mu_c.levy)
    g = type(f)(f.c, f.alpha, f.a_c, bad, f.extended)
    # shifting gamma by 1 adds i z, so the residual is max |z| = 5
    assert verify_decomposition(t, g, Z) == pytest.approx(5.0, rel=1e-8)


@pytest.mark.parametrize("name,t,level", member_fixtures(), ids=[f[0] for f in member_fixtures()])
def test_factor_is_a_levy_measure(name, t, level):
    # the cofactor density rho(u) - c^(-alpha-1) rho(u/c) is nonnegative on K_alpha
    f = factor_decomposition(t, -1.0, 0.5)
    u = np.geomspace(1e-3, 1e3, 61)
    for at in f.mu_c.levy:
        assert np.all(np.asarray(at.radial.density(u)) >= -1e-12)
    assert np.all(np.linalg.eigvalsh(np.atleast_2d(f.mu_c.A)) >= 0)


# ---------------------------------------------------------------------------
# diagnostics

def test_convexity_for_members_and_dirac():
    d = h_convexity_diagnostic(TiltedPowerLaw(1.0, 0.5, 1.0), 0.0)
    assert d.convex and not d.non_smooth
    # H(x) = int_{e^-x}^inf r^alpha nu(dr) for a point mass is a step, hence not convex
    d = h_convexity_diagnostic(DiracAtom(1.0, 1.0), 0.0)
    assert d.non_smooth and not d.convex


def test_convexity_h_values():
    # PowerLaw(1, 1.5) at alpha = 0.5: H(x) = int_{e^-x}^inf r^-2 dr = e^x
    d = h_convexity_diagnostic(PowerLaw(1.0, 1.5), 0.5, n=20)
    assert np.allclose(d.H, np.exp(d.x), rtol=1e-12)


def test_monotone_examples():
    assert monotone_order_check(lambda u: np.log(1 / u), 1, (1e-3, 0.999))["consistent"]
    assert monotone_order_check(lambda u: u ** -0.7, 3)["consistent"]
    osc = monotone_order_check(lambda u: 1 + 0.99 * np.sin(6 * np.log(u)), 1, (1e-3, 0.999))
    assert not osc["consistent"]
    # decreasing but concave fails at order 2
    assert not monotone_order_check(lambda u: 1 - u ** 2, 2, (1e-3, 0.999))["consistent"]
    assert monotone_order_check(lambda u: 1 - u ** 2, 1, (1e-3, 0.999))["consistent"]


def test_monotone_rejects_negative_order():
    with pytest.raises(ValueError):
        monotone_order_check(lambda u: u, -1)


def test_power_tail_is_completely_monotone_on_grid():
    h = PowerTail(2.0, 0.8)
    for m in range(5):
        assert monotone_order_check(lambda u: h(u), m)["consistent"]
