import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kalpha import KernelTable, MappingParams, epsilon, epsilon_star, g_kernel

LATTICE = [(a, m) for a in (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5) for m in (0, 1, 2)]

# eps_{alpha,m}(u) by 30-digit quadrature of g, frozen
EPS_ORACLE = [
    (-2.0, 0, 0.1, 0.49499999999999999944),
    (-1.0, 1, 1e-3, 0.9920922447210178628),
    (-0.5, 3, 1e-6, 14.612758099711059453),
    (0.0, 2, 0.01, 16.277428738347809354),
    (0.5, 1, 1e-4, 1446.0680743952365031),
    (1.0, 0, 0.3, 2.3333333333333334567),
    (1.5, 2, 0.05, 174.6832095352496518),
    (1.99, 1, 0.5, 0.63305718383407845601),
]


def mp_eps(a, m, u):
    with mp.workdps(30):
        g = lambda s: s ** (-a - 1) * mp.log(1 / s) ** m / mp.factorial(m)  # noqa: E731
        pts = sorted({mp.mpf(u), *(mp.mpf(10) ** -k for k in range(0, 13) if 10.0 ** -k > u)})
        return float(mp.quad(g, pts))


def test_params_reject_alpha_two():
    with pytest.raises(ValueError):
        MappingParams(2.0, 0)
    with pytest.raises(ValueError):
        MappingParams(0.0, -1)
    with pytest.raises(ValueError):
        MappingParams(0.0, 1.5)


def test_g_kernel_value():
    p = MappingParams(-1.0, 2)
    s = 0.3
    assert g_kernel(p, s) == pytest.approx(math.log(1 / s) ** 2 / 2, rel=1e-15)


@pytest.mark.parametrize("a,m,u,ref", EPS_ORACLE)
def test_epsilon_frozen_oracle(a, m, u, ref):
    assert epsilon(MappingParams(a, m), u) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("a,m", LATTICE)
def test_epsilon_matches_quadrature(a, m):
    p = MappingParams(a, m)
    for u in (1e-8, 1e-4, 0.01, 0.3, 0.9):
        ref = mp_eps(a, m, u)
        assert abs(epsilon(p, u) - ref) <= 1e-10 * max(1.0, abs(ref))


@pytest.mark.parametrize("a", [-2.0, -1.0, -0.5, -1e-4])
@pytest.mark.parametrize("m", [0, 1, 3])
def test_eps_at_zero(a, m):
    p = MappingParams(a, m)
    assert p.eps0 == (-a) ** (-(m + 1))
    assert epsilon(p, 0.0) == p.eps0
    if a <= -0.5:
        # u^(-alpha) is below 1e-150 here
        assert epsilon(p, 1e-300) == pytest.approx(p.eps0, rel=1e-10)


def test_eps_at_zero_infinite_for_nonnegative_alpha():
    assert MappingParams(0.0, 1).eps0 == math.inf
    assert MappingParams(1.5, 0).eps0 == math.inf


def test_epsilon_zero_beyond_one():
    p = MappingParams(0.5, 1)
    assert epsilon(p, 1.0) == 0.0
    assert epsilon(p, 3.0) == 0.0


@pytest.mark.parametrize("a,m", LATTICE)
def test_inversion_lattice(a, m):
    p = MappingParams(a, m)
    # beyond eps(1e-300) the inverse underflows
    top = min(p.eps0, 1e6, epsilon(p, 1e-300))
    ts = np.geomspace(1e-6 * top, 0.999 * top, 20)
    table = KernelTable(p)
    for t in ts:
        for u in (epsilon_star(p, t), table.epsilon_star(t)):
            assert abs(epsilon(p, u) - t) <= 1e-12 * max(1.0, t)


def test_closed_form_inverses():
    for t in (1e-3, 0.5, 3.0, 20.0):
        assert epsilon_star(MappingParams(0.0, 0), t) == pytest.approx(math.exp(-t), rel=1e-12)
        for a in (-1.0, -0.5, 0.5, 1.5):
            if a < 0 and t >= -1 / a:
                continue
            ref = (1 + a * t) ** (-1 / a)
            assert epsilon_star(MappingParams(a, 0), t) == pytest.approx(ref, rel=1e-12)
        for m in (1, 2, 3):
            ref = math.exp(-(math.factorial(m + 1) * t) ** (1 / (m + 1)))
            assert epsilon_star(MappingParams(0.0, m), t) == pytest.approx(ref, rel=1e-12)


def test_inverse_endpoints():
    p = MappingParams(-1.0, 1)
    assert epsilon_star(p, 0.0) == 1.0
    assert epsilon_star(p, p.eps0) == 0.0


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-3.0, 1.95), m=st.integers(0, 4), x=st.floats(1e-6, 0.999))
def test_inversion_property(a, m, x):
    p = MappingParams(a, m)
    top = min(p.eps0, 1e4, epsilon(p, 1e-300))
    t = x * top
    u = epsilon_star(p, t)
    assert 0.0 < u <= 1.0
    assert abs(epsilon(p, u) - t) <= 1e-12 * max(1.0, t)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-3.0, 1.95), m=st.integers(0, 4),
       u1=st.floats(1e-9, 1.0, exclude_max=True), u2=st.floats(1e-9, 1.0, exclude_max=True))
def test_epsilon_strictly_decreasing(a, m, u1, u2):
    if u1 == u2:
        return
    p = MappingParams(a, m)
    lo, hi = sorted((u1, u2))
    assert epsilon(p, lo) >= epsilon(p, hi)
