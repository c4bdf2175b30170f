"""The numba and numpy kernel paths must agree."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qmagic.kernels import numpy_impl

nb_impl = pytest.importorskip("qmagic.kernels.numba_impl")


@given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_jacobi_agrees_with_eigvalsh(n, batch, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(batch, n, n))
    a = a + a.transpose(0, 2, 1)
    for impl in (numpy_impl, nb_impl):
        w, v, sweeps = impl.jacobi_eigh_batch(a)
        assert sweeps >= 0
        np.testing.assert_allclose(w, np.linalg.eigvalsh(a)[:, ::-1], atol=1e-11)
        recon = np.einsum("bij,bj,bkj->bik", v, w, v)
        np.testing.assert_allclose(recon, a, atol=1e-11)


def test_jacobi_does_not_modify_input():
    a = np.array([[[2.0, 1.0], [1.0, 3.0]]])
    keep = a.copy()
    for impl in (numpy_impl, nb_impl):
        impl.jacobi_eigh_batch(a)
        np.testing.assert_array_equal(a, keep)


def _brute_subset(pool):
    m = pool.shape[0]
    best = np.zeros(m + 1)
    for k in range(1, m + 1):
        best[k] = max(np.linalg.eigvalsh(pool[list(c)].sum(axis=0))[-1]
                      for c in itertools.combinations(range(m), k))
    return best


@given(st.integers(1, 7), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_subset_max_eigs(m, n, seed):
    rng = np.random.default_rng(seed)
    vecs = rng.normal(size=(m, n))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    pool = np.einsum("ki,kj->kij", vecs, vecs)
    oracle = _brute_subset(pool)
    results = [impl.subset_max_eigs(pool) for impl in (numpy_impl, nb_impl)]
    for best, mask in results:
        np.testing.assert_allclose(best, oracle, atol=1e-10)
        for k in range(1, m + 1):
            sel = [i for i in range(m) if mask[k] >> i & 1]
            assert len(sel) == k
            assert np.linalg.eigvalsh(pool[sel].sum(axis=0))[-1] == pytest.approx(best[k], abs=1e-10)
    np.testing.assert_array_equal(results[0][1], results[1][1])


@given(st.integers(1, 40), st.integers(0, 2 ** 32 - 1))
def test_arc_window(m, seed):
    rng = np.random.default_rng(seed)
    z = np.exp(1j * np.sort(rng.uniform(-np.pi, np.pi, m)))
    oracle = np.zeros(m + 1)
    for k in range(1, m + 1):
        oracle[k] = max(abs(np.take(z, range(i, i + k), mode="wrap").sum()) for i in range(m))
    for impl in (numpy_impl, nb_impl):
        np.testing.assert_allclose(impl.arc_window_max(z), oracle, atol=1e-12)


@given(st.integers(1, 30), st.integers(1, 50), st.integers(0, 2 ** 32 - 1))
def test_topk_projection(m, nd, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(m, 3))
    u = rng.normal(size=(nd, 3))
    proj = -np.sort(-(v @ u.T), axis=0)
    oracle = np.concatenate([[0.0], np.cumsum(proj, axis=0).max(axis=1)])
    outs = [impl.topk_projection_max(v, u) for impl in (numpy_impl, nb_impl)]
    for best, arg in outs:
        np.testing.assert_allclose(best, oracle, atol=1e-12)
        for k in range(1, m + 1):
            assert np.sort(v @ u[arg[k]])[::-1][:k].sum() == pytest.approx(best[k], abs=1e-12)


def test_numpy_topk_chunking_matches():
    rng = np.random.default_rng(3)
    v, u = rng.normal(size=(20, 3)), rng.normal(size=(700, 3))
    a, _ = numpy_impl.topk_projection_max(v, u, chunk=64)
    b, _ = numpy_impl.topk_projection_max(v, u, chunk=1024)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_backend_flag_selects_numpy(monkeypatch):
    import importlib

    import qmagic._config as cfg
    import qmagic.kernels as kernels

    monkeypatch.setenv("QMAGIC_DISABLE_JIT", "1")
    assert not cfg.jit_enabled()
    try:
        importlib.reload(kernels)
        assert kernels.BACKEND == "numpy"
        assert kernels.jacobi_eigh_batch is numpy_impl.jacobi_eigh_batch
    finally:
        monkeypatch.delenv("QMAGIC_DISABLE_JIT")
        importlib.reload(kernels)
    assert kernels.BACKEND == "numba"
