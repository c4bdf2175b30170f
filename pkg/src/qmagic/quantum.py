"""States, projective measurements and Born-rule statistics.

Conventions
-----------
* Composite Hilbert spaces are ordered party by party, row-major, so the
  basis index of ``|s1 s2 ...>`` is ``s1 * d2 * ... + s2 * ... + ...``.
* Measurement outcomes are indexed in order of descending eigenvalue label.
  For a qubit, index 0 is the +1 outcome and index 1 the -1 outcome.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from . import kernels
from ._config import TOL
from .errors import (
    DegenerateObservableError,
    DimensionError,
    NotHermitianError,
    ValidationError,
)

__all__ = [
    "DensityMatrix",
    "ProjectiveMeasurement",
    "Assemblage",
    "eigendecompose_hermitian",
    "born_probabilities",
    "joint_distribution",
    "joint_distributions_batch",
    "product_expectation",
    "assemblage",
    "partial_trace",
]


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _hermiticity_error(m):
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _fix_phase(vecs, tol=1e-12):
    """Rotate each column so its first non-negligible entry is real positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = np.flatnonzero(np.abs(col) > tol)
        if idx.size:
            ph = col[idx[0]] / abs(col[idx[0]])
            out[:, j] = col / ph
    return out


def eigendecompose_hermitian(matrix, tol=None):
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.

    The complex problem ``H = A + iB`` is mapped to the real symmetric
    embedding ``[[A, -B], [B, A]]`` and diagonalized by cyclic Jacobi
    rotations.  Each eigenvalue of ``H`` appears twice in the embedding; one
    complex eigenvector is recovered per pair by Gram-Schmidt over the
    candidates ``x + iy``.

    Parameters
    ----------
    matrix : array_like, shape (n, n)
    tol : float, optional
        Hermiticity tolerance; defaults to ``TOL.validate``.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
    eigenvectors : ndarray, shape (n, n)
        Column ``j`` belongs to ``eigenvalues[j]``.

    Raises
    ------
    NotHermitianError
    """
    h = np.asarray(matrix, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {h.shape}")
    tol = TOL.validate if tol is None else tol
    asym = _hermiticity_error(h)
    if asym > tol:
        raise NotHermitianError(asym, tol)
    h = 0.5 * (h + h.conj().T)
    n = h.shape[0]
    emb = np.block([[h.real, -h.imag], [h.imag, h.real]])
    w, v, sweeps = kernels.jacobi_eigh_batch(emb[None])
    if sweeps < 0:
        raise np.linalg.LinAlgError("Jacobi iteration did not converge")
    w, v = w[0], v[0]
    cand = v[:n, :] + 1j * v[n:, :]
    vals, vecs = [], []
    for j in range(2 * n):
        z = cand[:, j].copy()
        for u in vecs:
            z -= np.vdot(u, z) * u
        nz = np.linalg.norm(z)
        if nz > 0.5:
            vecs.append(z / nz)
            vals.append(w[j])
        if len(vecs) == n:
            break
    if len(vecs) != n:  # pragma: no cover - would indicate a kernel defect
        raise np.linalg.LinAlgError("could not extract a complex eigenbasis")
    vecs = _fix_phase(np.stack(vecs, axis=1))
    return np.array(vals), vecs


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix.

    ``party_dims`` records the tensor factorization; its product must equal
    the matrix dimension.  Instances are immutable.
    """

    __slots__ = ("matrix", "party_dims")

    def __init__(self, matrix, party_dims: Sequence[int] | None = None, tol=None):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        dims = (m.shape[0],) if party_dims is None else tuple(int(d) for d in party_dims)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
            raise DimensionError(f"party dims {dims} do not multiply to {m.shape[0]}")
        tol = TOL.validate if tol is None else tol
        asym = _hermiticity_error(m)
        if asym > tol:
            raise NotHermitianError(asym, tol)
        tr = np.trace(m)
        if abs(tr - 1.0) > tol:
            raise ValidationError(f"trace is {tr.real:.12g}, expected 1")
        lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if lam_min < -tol:
            raise ValidationError(f"negative eigenvalue {lam_min:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "party_dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, party_dims={self.party_dims})"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.party_dims)

    @classmethod
    def from_vector(cls, psi, party_dims=None):
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), party_dims)

    def reduced(self, keep: Sequence[int]) -> "DensityMatrix":
        """Reduced state of the parties listed in ``keep``."""
        keep = sorted(keep)
        mat = partial_trace(self.matrix, self.party_dims, keep)
        return DensityMatrix(mat, [self.party_dims[k] for k in keep])

    def swapped(self) -> "DensityMatrix":
        """Bipartite state with the two parties exchanged."""
        if self.n_parties != 2:
            raise DimensionError("swap requires a bipartite state")
        da, db = self.party_dims
        r = self.matrix.reshape(da, db, da, db).transpose(1, 0, 3, 2)
        return DensityMatrix(r.reshape(da * db, da * db), (db, da))


def partial_trace(matrix, party_dims, keep):
    """Trace out every party not in ``keep`` (indices into ``party_dims``)."""
    dims = list(party_dims)
    n = len(dims)
    t = np.asarray(matrix).reshape(dims + dims)
    for p in sorted(set(range(n)) - set(keep), reverse=True):
        nloc = t.ndim // 2
        t = np.trace(t, axis1=p, axis2=p + nloc)
    d = int(np.prod([dims[k] for k in sorted(keep)])) if keep else 1
    return t.reshape(d, d)


class ProjectiveMeasurement:
    """Rank-1 projective measurement in a fixed outcome order.

    Stored as an orthonormal basis (columns of ``vectors``) together with real
    outcome labels sorted in descending order.  Projectors are derived.
    """

    __slots__ = ("vectors", "labels", "name")

    def __init__(self, vectors, labels=None, name: str | None = None, tol=None):
        v = np.asarray(vectors, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionError(f"basis must be a square matrix, got {v.shape}")
        d = v.shape[0]
        tol = TOL.identity if tol is None else tol
        gram_err = float(np.max(np.abs(v.conj().T @ v - np.eye(d))))
        if gram_err > tol:
            raise ValidationError(f"basis is not orthonormal (error {gram_err:.3e})")
        if labels is None:
            labels = np.arange(d, 0, -1, dtype=float) if d != 2 else np.array([1.0, -1.0])
        labels = np.asarray(labels, dtype=float)
        if labels.shape != (d,):
            raise DimensionError(f"need {d} labels, got {labels.shape}")
        if np.any(np.diff(labels) > 0):
            order = np.argsort(-labels, kind="stable")
            labels, v = labels[order], v[:, order]
        object.__setattr__(self, "vectors", _frozen(v))
        object.__setattr__(self, "labels", _frozen(labels))
        object.__setattr__(self, "name", name)

    def __setattr__(self, name, value):
        raise AttributeError("ProjectiveMeasurement is immutable")

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"ProjectiveMeasurement{tag}(dim={self.dim})"

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def projectors(self) -> np.ndarray:
        v = self.vectors
        return np.einsum("si,ti->ist", v, v.conj())

    @property
    def observable(self) -> np.ndarray:
        v = self.vectors
        return (v * self.labels) @ v.conj().T

    def conjugate(self) -> "ProjectiveMeasurement":
        """Measurement in the complex-conjugate basis (same labels)."""
        name = None if self.name is None else f"{self.name}*"
        return ProjectiveMeasurement(self.vectors.conj(), self.labels, name)

    @classmethod
    def from_observable(cls, matrix, name=None, tol=None):
        """Diagonalize a Hermitian observable; degenerate spectra are rejected."""
        tol = TOL.validate if tol is None else tol
        vals, vecs = eigendecompose_hermitian(matrix, tol)
        if vals.size > 1 and np.min(np.abs(np.diff(vals))) <= 1e3 * tol:
            raise DegenerateObservableError(
                f"observable has a repeated eigenvalue (spectrum {np.round(vals, 12)})")
        return cls(vecs, vals, name)

    @classmethod
    def from_projectors(cls, projectors, labels=None, name=None, tol=None):
        proj = np.asarray(projectors, dtype=np.complex128)
        if proj.ndim != 3 or proj.shape[1] != proj.shape[2] or proj.shape[0] != proj.shape[1]:
            raise DimensionError("need d projectors of shape (d, d)")
        d = proj.shape[1]
        tol = TOL.identity if tol is None else tol
        for i, p in enumerate(proj):
            if _hermiticity_error(p) > tol:
                raise NotHermitianError(_hermiticity_error(p), tol)
            if np.max(np.abs(p @ p - p)) > tol or abs(np.trace(p) - 1) > tol:
                raise ValidationError(f"projector {i} is not a rank-1 projector")
        for i in range(d):
            for j in range(i + 1, d):
                if np.max(np.abs(proj[i] @ proj[j])) > tol:
                    raise ValidationError(f"projectors {i} and {j} are not orthogonal")
        if np.max(np.abs(proj.sum(axis=0) - np.eye(d))) > tol:
            raise ValidationError("projectors do not sum to the identity")
        vecs = np.empty((d, d), dtype=np.complex128)
        for i, p in enumerate(proj):
            _, v = eigendecompose_hermitian(p, tol)
            vecs[:, i] = v[:, 0]
        return cls(_fix_phase(vecs), labels, name)


class Assemblage:
    """Unnormalized conditional states of one party, one per remote outcome."""

    __slots__ = ("members",)

    def __init__(self, members, tol=None):
        m = np.asarray(members, dtype=np.complex128)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise DimensionError("members must be a stack of square matrices")
        tol = TOL.validate if tol is None else tol
        for i, s in enumerate(m):
            if _hermiticity_error(s) > tol:
                raise NotHermitianError(_hermiticity_error(s), tol)
            if np.linalg.eigvalsh(0.5 * (s + s.conj().T))[0] < -tol:
                raise ValidationError(f"member {i} is not positive semidefinite")
        total = float(np.trace(m.sum(axis=0)).real)
        if abs(total - 1.0) > tol:
            raise ValidationError(f"member traces sum to {total:.12g}, expected 1")
        object.__setattr__(self, "members", _frozen(m))

    def __setattr__(self, name, value):
        raise AttributeError("Assemblage is immutable")

    def __len__(self):
        return self.members.shape[0]

    @property
    def traces(self) -> np.ndarray:
        return np.einsum("ijj->i", self.members).real

    def reduced_state(self) -> np.ndarray:
        return self.members.sum(axis=0)


def born_probabilities(state: DensityMatrix, meas: ProjectiveMeasurement) -> np.ndarray:
    """Outcome distribution ``p_i = Tr(Pi_i rho)``."""
    if state.dim != meas.dim:
        raise DimensionError(f"state dim {state.dim} != measurement dim {meas.dim}")
    v = meas.vectors
    return np.einsum("si,st,ti->i", v.conj(), state.matrix, v).real


def joint_distribution(state: DensityMatrix, meas_per_party: Sequence[ProjectiveMeasurement]) -> np.ndarray:
    """Joint outcome distribution, one axis per party.

    ``P[i, j, ...] = Tr[(Pi_i (x) Pi_j (x) ...) rho]``.
    """
    if len(meas_per_party) != state.n_parties:
        raise DimensionError(
            f"{len(meas_per_party)} measurements for {state.n_parties} parties")
    for p, (d, m) in enumerate(zip(state.party_dims, meas_per_party)):
        if d != m.dim:
            raise DimensionError(f"party {p}: dim {d} != measurement dim {m.dim}")
    w = reduce(np.kron, [m.vectors for m in meas_per_party])
    probs = np.einsum("si,st,ti->i", w.conj(), state.matrix, w).real
    return probs.reshape([m.dim for m in meas_per_party])


def joint_distributions_batch(state: DensityMatrix, vecs_a, vecs_b) -> np.ndarray:
    """Bipartite joint distributions for many setting pairs at once.

    ``vecs_a`` has shape (M, dA, NA) and ``vecs_b`` (M, dB, NB): basis
    vectors as columns, one measurement per pair.  Returns (M, NA, NB).
    """
    if state.n_parties != 2:
        raise DimensionError("batch joint distributions need a bipartite state")
    vecs_a = np.asarray(vecs_a, dtype=np.complex128)
    vecs_b = np.asarray(vecs_b, dtype=np.complex128)
    da, db = state.party_dims
    if vecs_a.shape[1] != da or vecs_b.shape[1] != db:
        raise DimensionError("measurement dims do not match the state")
    r4 = state.matrix.reshape(da, db, da, db)
    # <a b| rho |a b>, contracted party by party
    tmp = np.einsum("msa,mub,sutv->mabtv", vecs_a.conj(), vecs_b.conj(), r4)
    return np.einsum("mabtv,mta,mvb->mab", tmp, vecs_a, vecs_b).real


def product_expectation(state: DensityMatrix, meas_per_party: Sequence[ProjectiveMeasurement]) -> float:
    """``Tr[(O_1 (x) O_2 (x) ...) rho]`` with each ``O`` the labelled observable."""
    if len(meas_per_party) != state.n_parties:
        raise DimensionError(
            f"{len(meas_per_party)} measurements for {state.n_parties} parties")
    op = reduce(np.kron, [m.observable for m in meas_per_party])
    return float(np.trace(op @ state.matrix).real)


def assemblage(state: DensityMatrix, meas_on_a: ProjectiveMeasurement) -> Assemblage:
    """Conditional states of party B, ``sigma_i = Tr_A[(Pi_i (x) 1) rho]``."""
    if state.n_parties != 2:
        raise DimensionError("assemblage requires a bipartite state")
    da, db = state.party_dims
    if meas_on_a.dim != da:
        raise DimensionError(f"A dim {da} != measurement dim {meas_on_a.dim}")
    v = meas_on_a.vectors
    r4 = state.matrix.reshape(da, db, da, db)
    members = np.einsum("si,sutw,ti->iuw", v.conj(), r4, v)
    return Assemblage(members)
