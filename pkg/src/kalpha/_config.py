"""Numerical tolerances shared by every module.

Tolerances live in a context variable so that callers (and the command line
front end) can tighten or loosen them for a block of work without threading
keyword arguments through every call.
"""
from __future__ import annotations

import contextlib
import contextvars
import dataclasses


@dataclasses.dataclass(frozen=True)
class Tolerances:
    quad: float = 1e-10      # absolute target for adaptive quadrature
    inv: float = 1e-12       # relative target for epsilon_star inversion
    limit: float = 1e-8      # Cauchy acceptance for dyadic limits
    psd: float = 1e-12       # relative to largest |A| entry
    unit: float = 1e-12      # |xi| - 1
    mono: float = 1e-12      # relative slack on grid monotonicity checks
    mean: float = 1e-9       # zero-mean acceptance (relative to the mean's scale)

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if not (v > 0):
                raise ValueError(f"tolerance {f.name} must be positive, got {v!r}")


_current: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "kalpha_tolerances", default=Tolerances()
)


def get_tolerances() -> Tolerances:
    return _current.get()


@contextlib.contextmanager
def tolerances(**overrides):
    """Temporarily override tolerances, e.g. ``with tolerances(quad=1e-12): ...``."""
    token = _current.set(dataclasses.replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
