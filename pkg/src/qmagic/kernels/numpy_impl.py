"""Pure-numpy kernels.

Every function here has a twin of the same name and signature in
:mod:`qmagic.kernels.numba_impl`.  The numpy versions vectorize across the
batch / subset / direction axis instead of looping.
"""

from __future__ import annotations

import numpy as np

MAX_SWEEPS = 60
SWEEP_EPS = 1e-15


def jacobi_eigh_batch(stack):
    """Cyclic Jacobi diagonalization of a stack of real symmetric matrices.

    Parameters
    ----------
    stack : ndarray, shape (B, n, n)
        Real symmetric matrices.  Not modified.

    Returns
    -------
    w : ndarray, shape (B, n)
        Eigenvalues in descending order.
    v : ndarray, shape (B, n, n)
        Orthonormal eigenvectors as columns, matching ``w``.
    sweeps : int
        Sweeps used by the slowest member of the batch, or -1 if the sweep
        cap was hit.
    """
    a = np.array(stack, dtype=np.float64, copy=True)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected a (B, n, n) stack")
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    iu = np.triu_indices(n, 1)
    sweeps = -1
    for sweep in range(MAX_SWEEPS):
        off = np.sum(a[:, iu[0], iu[1]] ** 2, axis=1)
        diag = np.sum(np.diagonal(a, axis1=1, axis2=2) ** 2, axis=1)
        if np.all(off <= (SWEEP_EPS ** 2) * (diag + off) + 1e-300):
            sweeps = sweep
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = np.abs(apq) > 1e-300
                if not active.any():
                    continue
                safe = np.where(active, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                big = np.abs(theta) > 1e150
                th = np.where(big, 1.0, theta)
                t = np.sign(theta) / (np.abs(th) + np.sqrt(th * th + 1.0))
                # theta^2 would overflow: t ~ 1 / (2 theta)
                t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
                t = np.where(theta == 0.0, 1.0, t)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                c = np.where(active, c, 1.0)[:, None]
                s = np.where(active, s, 0.0)[:, None]
                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = c * colp - s * colq
                a[:, :, q] = s * colp + c * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = c * rowp - s * rowq
                a[:, q, :] = s * rowp + c * rowq
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = c * vp - s * vq
                v[:, :, q] = s * vp + c * vq
    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v, sweeps


def subset_max_eigs(pool):
    """Largest eigenvalue of every subset sum of ``pool``, maximized per size.

    ``pool`` is an (m, n, n) stack of real symmetric matrices.  Returns
    ``(best, best_mask)`` of length m + 1 where ``best[k]`` is the maximum
    over all k-subsets T of the largest eigenvalue of ``sum(pool[T])`` and
    ``best_mask[k]`` is a bitmask attaining it (lowest mask on ties).
    """
    pool = np.asarray(pool, dtype=np.float64)
    m, n, _ = pool.shape
    masks = np.arange(1, 1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(np.float64)
    sums = (bits @ pool.reshape(m, n * n)).reshape(-1, n, n)
    w, _, _ = jacobi_eigh_batch(sums)
    lam = w[:, 0]
    sizes = bits.sum(axis=1).astype(np.int64)
    best = np.zeros(m + 1)
    best_mask = np.zeros(m + 1, dtype=np.int64)
    for k in range(1, m + 1):
        sel = np.flatnonzero(sizes == k)
        j = sel[np.argmax(lam[sel])]
        best[k] = lam[j]
        best_mask[k] = masks[j]
    return best, best_mask


def arc_window_max(z):
    """Max modulus of a circular window sum, for every window length.

    ``z`` holds unit complex numbers sorted by argument.  ``out[k]`` is the
    largest ``|z[i] + ... + z[i+k-1]|`` over start positions i (indices mod m).
    """
    z = np.asarray(z, dtype=np.complex128)
    m = z.shape[0]
    pre = np.concatenate([[0.0], np.cumsum(np.concatenate([z, z]))])
    out = np.zeros(m + 1)
    lo = pre[:m]
    for k in range(1, m + 1):
        out[k] = np.abs(pre[k:k + m] - lo).max()
    return out


def topk_projection_max(vectors, directions, chunk=256):
    """Max over directions u of the sum of the k largest projections v . u.

    Returns ``(best, arg)`` of length m + 1; ``arg[k]`` indexes the direction
    attaining ``best[k]``.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    directions = np.asarray(directions, dtype=np.float64)
    m = vectors.shape[0]
    best = np.full(m + 1, -np.inf)
    best[0] = 0.0
    arg = np.zeros(m + 1, dtype=np.int64)
    for start in range(0, directions.shape[0], chunk):
        block = directions[start:start + chunk]
        proj = vectors @ block.T
        proj = -np.sort(-proj, axis=0)
        csum = np.cumsum(proj, axis=0)
        j = np.argmax(csum, axis=1)
        vals = csum[np.arange(m), j]
        better = vals > best[1:]
        best[1:] = np.where(better, vals, best[1:])
        arg[1:] = np.where(better, j + start, arg[1:])
    return best, arg
