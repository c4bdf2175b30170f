"""Numeric tolerances and backend selection."""

from __future__ import annotations

import contextlib
import dataclasses
import os

__all__ = ["Tolerances", "TOL", "override", "jit_enabled"]


@dataclasses.dataclass
class Tolerances:
    validate: float = 1e-9        # state / measurement / tensor validation
    identity: float = 1e-10       # internal identities (reconstruction, completeness)
    feasibility: float = 1e-8     # LP constraint residuals
    majorization: float = 1e-9    # absolute slack on partial sums
    bisection: float = 1e-7       # threshold scans


TOL = Tolerances()


@contextlib.contextmanager
def override(**values):
    """Temporarily replace fields of the global :data:`TOL`."""
    unknown = set(values) - {f.name for f in dataclasses.fields(Tolerances)}
    if unknown:
        raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
    saved = dataclasses.asdict(TOL)
    for key, val in values.items():
        setattr(TOL, key, float(val))
    try:
        yield TOL
    finally:
        for key, val in saved.items():
            setattr(TOL, key, val)


def jit_enabled() -> bool:
    """True unless ``QMAGIC_DISABLE_JIT`` is set to a truthy value."""
    flag = os.environ.get("QMAGIC_DISABLE_JIT", "").strip().lower()
    return flag not in {"1", "true", "yes", "on"}
