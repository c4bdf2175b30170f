"""Majorization arithmetic and the subset-spectral uncertainty bound.

For a pool of rank-1 projectors (all outcomes of all observables) the bound
has partial sums

    S_k = max over k-subsets T of lambda_max(sum_{P in T} P),

flattened to the least concave majorant so that ``s_k = S_k - S_{k-1}`` is
non-increasing.  Any direct sum of Born distributions has partial sums of its
descending rearrangement at most ``S_k``.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import kernels
from ._config import TOL
from .errors import DimensionError, PoolTooLargeError, TotalMismatchError, ValidationError
from .quantum import ProjectiveMeasurement

__all__ = [
    "MajorizationBound",
    "sort_descending",
    "direct_sum",
    "partial_sums",
    "majorizes",
    "concave_majorant",
    "compute_bound",
    "bound_from_partial_sums",
    "projector_pool",
    "bloch_vectors",
    "is_doubly_stochastic",
    "MAX_EXHAUSTIVE_POOL",
]

MAX_EXHAUSTIVE_POOL = 12
_SIGMAS = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])


@dataclasses.dataclass(frozen=True)
class MajorizationBound:
    """Bound vector ``s`` with partial sums ``S`` (``S[0] = 0``).

    Attributes
    ----------
    s : ndarray, shape (K,)
        Non-increasing increments.
    partial_sums : ndarray, shape (K + 1,)
        ``S_k``; ``S_K`` equals the observable count.
    observable_count : int
    raw_partial_sums : ndarray
        Subset maxima before flattening.
    method : str
        ``"exhaustive"``, ``"bloch-planar"``, ``"bloch-ascent"`` or ``"given"``.
    exact : bool
        False when ``raw_partial_sums`` are lower estimates from local search.
    """

    s: np.ndarray
    partial_sums: np.ndarray
    observable_count: int
    raw_partial_sums: np.ndarray
    method: str = "given"
    exact: bool = True

    def __post_init__(self):
        ps = np.asarray(self.partial_sums, dtype=float)
        if ps.ndim != 1 or ps[0] != 0.0:
            raise ValidationError("partial sums must start at S_0 = 0")
        if np.any(np.diff(ps) < -TOL.majorization):
            raise ValidationError("partial sums must be non-decreasing")
        if abs(ps[-1] - self.observable_count) > TOL.majorization:
            raise ValidationError(f"final partial sum {ps[-1]} != {self.observable_count}")

    @property
    def total(self) -> float:
        return float(self.partial_sums[-1])

    def __len__(self):
        return self.s.size


def sort_descending(v) -> np.ndarray:
    """Non-increasing rearrangement; ties keep their input order."""
    v = np.asarray(v, dtype=float)
    return v[np.argsort(-v, kind="stable")]


def direct_sum(vs) -> np.ndarray:
    """Concatenate blocks."""
    vs = [np.asarray(v, dtype=float).ravel() for v in vs]
    return np.concatenate(vs) if vs else np.zeros(0)


def partial_sums(v) -> np.ndarray:
    """``(0, v1, v1 + v2, ...)`` of the descending rearrangement."""
    return np.concatenate([[0.0], np.cumsum(sort_descending(v))])


def majorizes(a, bound, tol: float | None = None):
    """Test ``a`` is majorized by ``bound``.

    Parameters
    ----------
    a : array_like
    bound : MajorizationBound or array_like
        A plain vector is treated as its own descending partial sums.
    tol : float, optional
        Absolute slack allowed on each partial sum.

    Returns
    -------
    holds : bool
    worst_k : int
        1-based k with the smallest slack ``S_k - A_k``.
    slack : float
        That smallest slack; negative when the relation fails.

    Raises
    ------
    TotalMismatchError
        If the totals differ by more than ``tol``.
    """
    tol = TOL.majorization if tol is None else tol
    a_ps = partial_sums(a)
    b_ps = bound.partial_sums if isinstance(bound, MajorizationBound) else partial_sums(bound)
    n = max(a_ps.size, b_ps.size)
    a_ps = np.pad(a_ps, (0, n - a_ps.size), mode="edge")
    b_ps = np.pad(b_ps, (0, n - b_ps.size), mode="edge")
    if abs(a_ps[-1] - b_ps[-1]) > max(tol, tol * abs(b_ps[-1])):
        raise TotalMismatchError(f"totals differ: {a_ps[-1]:.12g} vs {b_ps[-1]:.12g}")
    if n <= 2:
        return True, n - 1, 0.0
    # k = K compares the totals, already checked above; its slack is pure rounding
    slack = b_ps[1:-1] - a_ps[1:-1]
    k = int(np.argmin(slack))
    return bool(slack[k] >= -tol), k + 1, float(slack[k])


def concave_majorant(values) -> np.ndarray:
    """Least concave majorant of ``values`` sampled at 0, 1, 2, ..."""
    y = np.asarray(values, dtype=float)
    hull = []
    for i in range(y.size):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # drop i1 if it lies on or below the chord i0 -> i
            if (y[i1] - y[i0]) * (i - i0) <= (y[i] - y[i0]) * (i1 - i0):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.interp(np.arange(y.size), hull, y[hull])


def bound_from_partial_sums(raw, observable_count: int, method: str = "given",
                            exact: bool = True) -> MajorizationBound:
    """Flatten raw subset maxima into a :class:`MajorizationBound`."""
    raw = np.asarray(raw, dtype=float).copy()
    raw[0] = 0.0
    raw[-1] = float(observable_count)
    flat = concave_majorant(raw)
    flat[-1] = float(observable_count)
    return MajorizationBound(np.diff(flat), flat, int(observable_count), raw, method, exact)


def projector_pool(observables) -> np.ndarray:
    """Stack of all rank-1 projectors, observable-major."""
    observables = list(observables)
    if not observables:
        raise ValidationError("need at least one observable")
    dims = {o.dim for o in observables}
    if len(dims) != 1:
        raise DimensionError(f"observables have mixed dimensions {sorted(dims)}")
    return np.concatenate([o.projectors for o in observables])


def bloch_vectors(pool) -> np.ndarray:
    """Bloch vectors ``tr(P sigma)`` of qubit projectors."""
    return np.einsum("kij,aji->ka", pool, _SIGMAS).real


def _real_embedding(pool):
    re, im = pool.real, pool.imag
    return np.block([[re, -im], [im, re]])


def _exhaustive(pool):
    best, _ = kernels.subset_max_eigs(_real_embedding(pool))
    return best


def _fibonacci_sphere(n):
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = i * np.pi * (3 - np.sqrt(5))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def _ascend(vectors, u, k, max_iter=200):
    """Fixed point of u <- normalize(sum of the k vectors most aligned with u)."""
    prev = None
    for _ in range(max_iter):
        top = np.argpartition(-(vectors @ u), k - 1)[:k]
        key = frozenset(top.tolist())
        if key == prev:
            break
        prev = key
        s = vectors[top].sum(axis=0)
        norm = np.linalg.norm(s)
        if norm < 1e-15:
            break
        u = s / norm
    return u


def _bloch_window_sums(vectors, n_seeds=512, n_anchors=64, n_starts=4):
    """Max |sum of k vectors| for every k.  Returns (values, exact)."""
    m = vectors.shape[0]
    _, sv, vt = np.linalg.svd(vectors, full_matrices=False)
    if sv.size < 3 or sv[2] <= 1e-9 * max(1.0, sv[0]):
        plane = vectors @ vt[:2].T
        z = plane[:, 0] + 1j * plane[:, 1]
        z = z[np.argsort(np.angle(z), kind="stable")]
        return kernels.arc_window_max(z), True

    step = max(1, m // 256)
    seeds = np.vstack([_fibonacci_sphere(n_seeds), vectors[::step]])
    seeds /= np.linalg.norm(seeds, axis=1, keepdims=True)
    best, arg = kernels.topk_projection_max(vectors, seeds)
    anchors = np.unique(np.concatenate([
        np.rint(np.linspace(1, m, n_anchors)).astype(int), [max(1, m // 2)]]))
    finals = []
    for i, k in enumerate(anchors):
        # start from the best seed for this k and for the neighbouring anchors
        near = anchors[max(0, i - n_starts // 2):i + n_starts // 2 + 1]
        for j in np.unique(arg[near]):
            finals.append(_ascend(vectors, seeds[j], int(k)))
    refined, _ = kernels.topk_projection_max(vectors, np.array(finals))
    return np.maximum(best, refined), False


def compute_bound(observables, method: str = "auto",
                  max_pool: int = MAX_EXHAUSTIVE_POOL) -> MajorizationBound:
    """Uncertainty bound of a list of projective measurements.

    Parameters
    ----------
    observables : sequence of ProjectiveMeasurement
        All of the same dimension.
    method : {"auto", "exhaustive", "bloch"}
        ``"auto"`` enumerates subsets when the pool has at most ``max_pool``
        projectors and otherwise uses the qubit Bloch-vector route, which is
        exact for coplanar directions and a local-search lower estimate in 3D.
    max_pool : int

    Raises
    ------
    DimensionError
        Mixed dimensions, or ``"bloch"`` requested for non-qubits.
    PoolTooLargeError
        Pool above ``max_pool`` with no fast path available.
    """
    observables = list(observables)
    if any(not isinstance(o, ProjectiveMeasurement) for o in observables):
        raise ValidationError("observables must be ProjectiveMeasurement instances")
    pool = projector_pool(observables)
    m_obs, size = len(observables), pool.shape[0]
    dim = observables[0].dim
    if method == "auto":
        method = "exhaustive" if size <= max_pool else ("bloch" if dim == 2 else None)
        if method is None:
            raise PoolTooLargeError(
                f"pool of {size} projectors exceeds the exhaustive limit {max_pool}")
    if method == "exhaustive":
        if size > max_pool:
            raise PoolTooLargeError(
                f"pool of {size} projectors exceeds the exhaustive limit {max_pool}")
        return bound_from_partial_sums(_exhaustive(pool), m_obs, "exhaustive")
    if method == "bloch":
        if dim != 2:
            raise DimensionError("the Bloch route needs qubit observables")
        sums, exact = _bloch_window_sums(bloch_vectors(pool))
        ks = np.arange(size + 1)
        raw = 0.5 * ks + 0.5 * sums
        return bound_from_partial_sums(raw, m_obs, "bloch-planar" if exact else "bloch-ascent", exact)
    raise ValueError(f"unknown method {method!r}")


def is_doubly_stochastic(matrix, tol: float | None = None) -> bool:
    """Square, non-negative, unit row and column sums."""
    tol = TOL.validate if tol is None else tol
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        return False
    return bool(d.min(initial=0.0) >= -tol
                and np.abs(d.sum(axis=0) - 1).max(initial=0.0) <= tol
                and np.abs(d.sum(axis=1) - 1).max(initial=0.0) <= tol)
