"""numba-compiled kernels; same contracts as :mod:`qmagic.kernels.numpy_impl`."""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .numpy_impl import MAX_SWEEPS, SWEEP_EPS


def _has_omp():
    try:
        from numba.np.ufunc import omppool  # noqa: F401
    except ImportError:
        return False
    return True

# the bundled TBB may be too old; OpenMP or the workqueue are always usable
if nb.config.THREADING_LAYER == "default":
    nb.config.THREADING_LAYER = "omp" if _has_omp() else "workqueue"

njit = nb.njit(cache=True, nogil=True)


@njit
def _jacobi_inplace(a, v):
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            v[i, j] = 1.0 if i == j else 0.0
    for sweep in range(MAX_SWEEPS):
        off = 0.0
        diag = 0.0
        for p in range(n):
            diag += a[p, p] * a[p, p]
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if off <= SWEEP_EPS * SWEEP_EPS * (diag + off) + 1e-300:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return -1


@njit
def _jacobi_batch(stack):
    nb_, n, _ = stack.shape
    w = np.empty((nb_, n))
    v = np.empty((nb_, n, n))
    worst = 0
    for b in range(nb_):
        a = stack[b].copy()
        used = _jacobi_inplace(a, v[b])
        if used < 0:
            worst = -1
        elif worst >= 0 and used > worst:
            worst = used
        for i in range(n):
            w[b, i] = a[i, i]
    return w, v, worst


def jacobi_eigh_batch(stack):
    a = np.ascontiguousarray(stack, dtype=np.float64)
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ValueError("expected a (B, n, n) stack")
    w, v, sweeps = _jacobi_batch(a)
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v, int(sweeps)


@njit
def _subset_max_eigs(pool):
    m, n, _ = pool.shape
    best = np.zeros(m + 1)
    best_mask = np.zeros(m + 1, dtype=np.int64)
    seen = np.zeros(m + 1, dtype=np.bool_)
    work = np.empty((n, n))
    vecs = np.empty((n, n))
    for mask in range(1, 1 << m):
        for i in range(n):
            for j in range(n):
                work[i, j] = 0.0
        k = 0
        for t in range(m):
            if (mask >> t) & 1:
                k += 1
                for i in range(n):
                    for j in range(n):
                        work[i, j] += pool[t, i, j]
        _jacobi_inplace(work, vecs)
        lam = work[0, 0]
        for i in range(1, n):
            if work[i, i] > lam:
                lam = work[i, i]
        if not seen[k] or lam > best[k]:
            best[k] = lam
            best_mask[k] = mask
            seen[k] = True
    return best, best_mask


def subset_max_eigs(pool):
    return _subset_max_eigs(np.ascontiguousarray(pool, dtype=np.float64))


@nb.njit(cache=True, nogil=True, parallel=True)
def _arc_window_max(z):
    m = z.shape[0]
    pre_re = np.zeros(2 * m + 1)
    pre_im = np.zeros(2 * m + 1)
    for i in range(2 * m):
        pre_re[i + 1] = pre_re[i] + z[i % m].real
        pre_im[i + 1] = pre_im[i] + z[i % m].imag
    out = np.zeros(m + 1)
    for k in nb.prange(1, m + 1):
        best = 0.0
        for i in range(m):
            dr = pre_re[i + k] - pre_re[i]
            di = pre_im[i + k] - pre_im[i]
            r = dr * dr + di * di
            if r > best:
                best = r
        out[k] = math.sqrt(best)
    return out


def arc_window_max(z):
    return _arc_window_max(np.ascontiguousarray(z, dtype=np.complex128))


@njit
def _topk_projection_max(vectors, directions):
    m = vectors.shape[0]
    best = np.full(m + 1, -np.inf)
    best[0] = 0.0
    arg = np.zeros(m + 1, dtype=np.int64)
    proj = np.empty(m)
    for j in range(directions.shape[0]):
        for i in range(m):
            proj[i] = (vectors[i, 0] * directions[j, 0]
                       + vectors[i, 1] * directions[j, 1]
                       + vectors[i, 2] * directions[j, 2])
        srt = np.sort(proj)[::-1]
        acc = 0.0
        for k in range(m):
            acc += srt[k]
            if acc > best[k + 1]:
                best[k + 1] = acc
                arg[k + 1] = j
    return best, arg


def topk_projection_max(vectors, directions):
    v = np.ascontiguousarray(vectors, dtype=np.float64)
    d = np.ascontiguousarray(directions, dtype=np.float64)
    if v.shape[1] != 3 or d.shape[1] != 3:
        raise ValueError("vectors and directions must be (., 3)")
    return _topk_projection_max(v, d)
