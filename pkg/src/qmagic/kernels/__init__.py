"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used by default.  Set ``QMAGIC_DISABLE_JIT=1`` before
import to force the numpy path; it is also used when numba cannot be
imported.  Both paths implement identical contracts and are cross-checked in
the test suite.
"""

from __future__ import annotations

from .._config import jit_enabled
from . import numpy_impl

BACKEND = "numpy"
_impl = numpy_impl

if jit_enabled():
    try:
        from . import numba_impl as _impl  # noqa: F811
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = numpy_impl

jacobi_eigh_batch = _impl.jacobi_eigh_batch
subset_max_eigs = _impl.subset_max_eigs
arc_window_max = _impl.arc_window_max
topk_projection_max = _impl.topk_projection_max

__all__ = [
    "BACKEND",
    "jacobi_eigh_batch",
    "subset_max_eigs",
    "arc_window_max",
    "topk_projection_max",
]
