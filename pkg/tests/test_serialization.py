import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import member_fixtures, one_atom
from kalpha import (Composite, DiracAtom, ExpTail, KClass, LevyTriplet, LogFactor, PowerLaw,
                    PowerTail, Pushforward, StepDown, Tabulated, TabulatedEll, TiltedPowerLaw,
                    apply_phi, char_exponent, factor_decomposition)
from kalpha.serialization import (SchemaError, load_triplet, radial_from_dict, radial_to_dict,
                                  save_triplet, triplet_from_dict, triplet_hash, triplet_to_dict)

RADIALS = [
    PowerLaw(1.3, 0.7),
    TiltedPowerLaw(2.0, 0.5, 1.5),
    DiracAtom(2.0, 0.25),
    Tabulated((0.1, 1.0, 10.0), (5.0, 1.0, 0.1), True, False),
    KClass(0.0, StepDown((0.5, 2.0), (2.0, 1.0, 0.0))),
    KClass(-0.5, Composite((PowerTail(1.0, 1.2), ExpTail(0.5, 2.0)))),
    KClass(0.3, LogFactor(StepDown((), (1.5,)), 2, 1.0)),
    KClass(0.1, TabulatedEll((1.0, 10.0), (1.0, 0.1))),
    KClass(0.0, Pushforward(TiltedPowerLaw(1.0, 0.5, 1.0), 0.0, 1)),
]


@pytest.mark.parametrize("r", RADIALS, ids=[type(r).__name__ for r in RADIALS])
def test_radial_roundtrip(r):
    d = radial_to_dict(r)
    back = radial_from_dict(json.loads(json.dumps(d)))
    assert radial_to_dict(back) == d
    u = np.geomspace(0.05, 20, 7)
    assert np.array_equal(np.asarray(back.density(u)), np.asarray(r.density(u)))


@pytest.mark.parametrize("name,t,level", member_fixtures(), ids=[f[0] for f in member_fixtures()])
def test_triplet_roundtrip_and_hash(name, t, level, tmp_path):
    path = tmp_path / "t.json"
    save_triplet(t, path)
    back = load_triplet(path)
    assert triplet_hash(back) == triplet_hash(t)
    z = np.full(t.dim, 0.7)
    assert char_exponent(back, z) == char_exponent(t, z)


def test_mapped_and_factor_outputs_roundtrip():
    t = member_fixtures()[1][1]
    for out in (apply_phi(t, (0.0, 1)), apply_phi(t, (-1.0, 0)), factor_decomposition(t, -1.0, 0.5).mu_c):
        back = triplet_from_dict(json.loads(json.dumps(triplet_to_dict(out))))
        assert triplet_hash(back) == triplet_hash(out)


def test_hash_changes_with_content(dirac):
    other = one_atom(DiracAtom(1.0, 1.0 + 1e-15))
    assert triplet_hash(dirac) != triplet_hash(other)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1e-6, 1e6), beta=st.floats(0.01, 1.99), g=st.floats(-1e3, 1e3))
def test_floats_roundtrip_exactly(c, beta, g):
    t = one_atom(PowerLaw(c, beta), gamma=[g])
    back = triplet_from_dict(json.loads(json.dumps(triplet_to_dict(t))))
    assert back.gamma[0] == g and back.levy.atoms[0].radial.c == c


@pytest.mark.parametrize("bad", [
    [],
    {"A": [[1.0]]},
    {"gamma": [0.0], "atoms": [{"xi": [1.0], "w": 1.0, "radial": {"c": 1.0}}]},
    {"gamma": [0.0], "atoms": [{"xi": [1.0], "w": 1.0, "radial": {"kind": "cauchy"}}]},
    {"gamma": [0.0], "atoms": [{"xi": [1.0], "w": 1.0, "radial": {"kind": "power_law", "c": 1.0}}]},
    {"dim": 2, "gamma": [0.0]},
])
def test_schema_errors(bad):
    with pytest.raises(SchemaError):
        triplet_from_dict(bad)


def test_minimal_document():
    t = triplet_from_dict({"gamma": [0.5]})
    assert isinstance(t, LevyTriplet) and t.dim == 1 and len(t.levy) == 0
