"""JSON form of triplets, radial measures and ell functions.

    {"dim": d, "A": [[..]], "gamma": [..],
     "atoms": [{"xi": [..], "w": w, "radial": {"kind": ..., ...}}]}

Every object carries a "kind" discriminator; floats round-trip exactly.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from .ell import (Composite, EllFunction, ExpTail, LogFactor, PowerLogSpline, PowerTail,
                  Pushforward, StepDown, TabulatedEll)
from .radial import (DilationResidual, DiracAtom, KClass, PowerLaw, RadialMeasure, Tabulated,
                     TiltedPowerLaw)
from .triplet import LevyTriplet, PolarLevyMeasure, SphericalAtom


class SchemaError(ValueError):
    pass


def _floats(xs):
    return [float(x) for x in xs]


# ---------------------------------------------------------------------------
# ell

def ell_to_dict(e: EllFunction) -> dict:
    if isinstance(e, StepDown):
        return {"kind": "step_down", "breaks": _floats(e.breaks), "levels": _floats(e.levels)}
    if isinstance(e, PowerTail):
        return {"kind": "power_tail", "c": float(e.c), "p": float(e.p)}
    if isinstance(e, ExpTail):
        return {"kind": "exp_tail", "c": float(e.c), "theta": float(e.theta)}
    if isinstance(e, LogFactor):
        return {"kind": "log_factor", "base": ell_to_dict(e.base), "k": int(e.k), "scale": float(e.scale)}
    if isinstance(e, Composite):
        return {"kind": "composite", "terms": [ell_to_dict(t) for t in e.terms]}
    if isinstance(e, TabulatedEll):
        return {"kind": "tabulated", "r": _floats(e.r), "values": _floats(e.values)}
    if isinstance(e, PowerLogSpline):
        return {"kind": "spline", "breaks": _floats(e.breaks),
                "pieces": [[[float(c), float(q), int(n)] for c, q, n in p] for p in e.pieces],
                "monotone": bool(e.monotone_hint)}
    if isinstance(e, Pushforward):
        return {"kind": "pushforward", "radial": radial_to_dict(e.radial),
                "alpha": float(e.alpha), "m": int(e.m)}
    raise SchemaError(f"cannot serialize ell of type {type(e).__name__}")


def ell_from_dict(d: dict) -> EllFunction:
    k = _kind(d)
    try:
        if k == "step_down":
            return StepDown(tuple(_floats(d["breaks"])), tuple(_floats(d["levels"])))
        if k == "power_tail":
            return PowerTail(float(d["c"]), float(d["p"]))
        if k == "exp_tail":
            return ExpTail(float(d["c"]), float(d["theta"]))
        if k == "log_factor":
            return LogFactor(ell_from_dict(d["base"]), int(d["k"]), float(d.get("scale", 1.0)))
        if k == "composite":
            return Composite(tuple(ell_from_dict(t) for t in d["terms"]))
        if k == "tabulated":
            return TabulatedEll(tuple(_floats(d["r"])), tuple(_floats(d["values"])))
        if k == "spline":
            pieces = tuple(tuple((float(c), float(q), int(n)) for c, q, n in p) for p in d["pieces"])
            return PowerLogSpline(tuple(_floats(d["breaks"])), pieces, bool(d.get("monotone", False)))
        if k == "pushforward":
            return Pushforward(radial_from_dict(d["radial"]), float(d["alpha"]), int(d.get("m", 0)))
    except (KeyError, TypeError) as e:
        raise SchemaError(f"ell '{k}': missing or malformed field {e}") from None
    raise SchemaError(f"unknown ell kind {k!r}")


# ---------------------------------------------------------------------------
# radial

def radial_to_dict(r: RadialMeasure) -> dict:
    if isinstance(r, PowerLaw):
        return {"kind": "power_law", "c": float(r.c), "beta": float(r.beta)}
    if isinstance(r, TiltedPowerLaw):
        return {"kind": "tilted", "c": float(r.c), "beta": float(r.beta), "theta": float(r.theta)}
    if isinstance(r, DiracAtom):
        return {"kind": "dirac", "r0": float(r.r0), "mass": float(r.mass)}
    if isinstance(r, KClass):
        return {"kind": "kclass", "alpha": float(r.alpha), "ell": ell_to_dict(r.ell)}
    if isinstance(r, Tabulated):
        return {"kind": "tabulated", "r": _floats(r.r), "values": _floats(r.values),
                "extrapolate_low": bool(r.extrapolate_low), "extrapolate_high": bool(r.extrapolate_high)}
    if isinstance(r, DilationResidual):
        return {"kind": "dilation_residual", "base": radial_to_dict(r.base),
                "alpha": float(r.alpha), "c": float(r.c)}
    raise SchemaError(f"cannot serialize radial of type {type(r).__name__}")


def _kind(d):
    if not isinstance(d, dict) or "kind" not in d:
        raise SchemaError("object without a 'kind' field")
    return d["kind"]


def radial_from_dict(d: dict) -> RadialMeasure:
    k = _kind(d)
    try:
        if k == "power_law":
            return PowerLaw(float(d["c"]), float(d["beta"]))
        if k == "tilted":
            return TiltedPowerLaw(float(d["c"]), float(d["beta"]), float(d["theta"]))
        if k == "dirac":
            return DiracAtom(float(d["r0"]), float(d["mass"]))
        if k == "kclass":
            return KClass(float(d["alpha"]), ell_from_dict(d["ell"]))
        if k == "tabulated":
            return Tabulated(tuple(_floats(d["r"])), tuple(_floats(d["values"])),
                             bool(d.get("extrapolate_low", True)), bool(d.get("extrapolate_high", True)))
        if k == "dilation_residual":
            return DilationResidual(radial_from_dict(d["base"]), float(d["alpha"]), float(d["c"]))
    except (KeyError, TypeError) as e:
        raise SchemaError(f"radial '{k}': missing or malformed field {e}") from None
    raise SchemaError(f"unknown radial kind {k!r}")


# ---------------------------------------------------------------------------
# triplets

def triplet_to_dict(t: LevyTriplet) -> dict:
    return {"dim": t.dim, "A": t.A.tolist(), "gamma": t.gamma.tolist(),
            "atoms": [{"xi": a.xi.tolist(), "w": float(a.w), "radial": radial_to_dict(a.radial)}
                      for a in t.levy]}


def triplet_from_dict(d: dict) -> LevyTriplet:
    if not isinstance(d, dict):
        raise SchemaError("triplet must be a JSON object")
    try:
        gamma = d["gamma"]
        dim = int(d.get("dim", len(gamma)))
        A = d.get("A", np.zeros((dim, dim)).tolist())
        atoms = tuple(SphericalAtom(a["xi"], a["w"], radial_from_dict(a["radial"]))
                      for a in d.get("atoms", []))
        t = LevyTriplet(A, gamma, PolarLevyMeasure(atoms))
    except (KeyError, TypeError) as e:
        raise SchemaError(f"triplet: missing or malformed field {e}") from None
    except ValueError as e:
        raise SchemaError(f"triplet: {e}") from None
    if t.dim != dim:
        raise SchemaError(f"dim is {dim} but gamma has length {t.dim}")
    return t


def dumps(obj: dict) -> str:
    """Canonical JSON: sorted keys, fixed separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def triplet_hash(t: LevyTriplet) -> str:
    return hashlib.sha256(dumps(triplet_to_dict(t)).encode()).hexdigest()


def load_triplet(path) -> LevyTriplet:
    with open(path, encoding="utf-8") as fh:
        return triplet_from_dict(json.load(fh))


def save_triplet(t: LevyTriplet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(triplet_to_dict(t), fh, indent=2, sort_keys=True)
        fh.write("\n")
