import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_pure, random_unitary
from qmagic.errors import DimensionError, PoolTooLargeError, TotalMismatchError, ValidationError
from qmagic.families import bloch_measurement, mub_family, pauli
from qmagic.majorization import (
    MajorizationBound,
    bloch_vectors,
    bound_from_partial_sums,
    compute_bound,
    concave_majorant,
    direct_sum,
    is_doubly_stochastic,
    majorizes,
    partial_sums,
    projector_pool,
    sort_descending,
)
from qmagic.quantum import DensityMatrix, ProjectiveMeasurement, born_probabilities
from qmagic.steering import icosahedron_family

R2, R3, R5 = np.sqrt(2), np.sqrt(3), np.sqrt(5)
S_XY = np.array([1, R2 / 2, (2 - R2) / 2, 0])
S_XYZ = np.array([1, R2 / 2, (1 + R3 - R2) / 2, (1 - R3 + R2) / 2, (2 - R2) / 2, 0])


def test_sort_descending_examples():
    np.testing.assert_array_equal(sort_descending([0.2, 0.5, 0.3]), [0.5, 0.3, 0.2])
    np.testing.assert_array_equal(sort_descending([3, 2, 1]), [3, 2, 1])
    np.testing.assert_array_equal(sort_descending([0.25] * 4), [0.25] * 4)


def test_direct_sum_examples():
    np.testing.assert_array_equal(direct_sum([[1, 0], [1, 0]]), [1, 0, 1, 0])
    assert direct_sum([]).size == 0
    eta = 1 / R3
    v = direct_sum([[(1 + eta) / 2, (1 - eta) / 2]] * 3)
    assert v.size == 6 and v.sum() == pytest.approx(3)
    np.testing.assert_allclose(v[::2], (1 + eta) / 2)


def test_majorizes_examples():
    a = np.array([0.5, 0.3, 0.2])
    assert majorizes(a, a) == (True, 1, 0.0)
    holds, k, slack = majorizes([1, 0, 1, 0], compute_bound([pauli("x"), pauli("y")]))
    assert not holds and k == 2
    assert slack == pytest.approx(1 + R2 / 2 - 2)
    assert majorizes(np.full(6, 0.5), compute_bound(mub_family(2)))[0]
    with pytest.raises(TotalMismatchError):
        majorizes([1, 0], [0.5, 0.4])


@given(st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_majorizes_properties(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(n))
    # doubly stochastic images are majorized: D a < a
    d = sum(w * np.eye(n)[rng.permutation(n)] for w in rng.dirichlet(np.ones(4)))
    b = d @ a
    c = d @ b
    assert majorizes(b, a)[0]
    assert majorizes(c, b)[0] and majorizes(c, a)[0]  # transitivity chain
    assert majorizes(rng.permutation(a), a)[0] and majorizes(a, rng.permutation(a))[0]
    assert majorizes(np.full(n, 1 / n), a)[0]


def test_concave_majorant():
    raw = np.array([0, 1, 1.2, 2.5, 2.6, 3])
    flat = concave_majorant(raw)
    assert np.all(flat >= raw - 1e-15)
    assert np.all(np.diff(flat, 2) <= 1e-12)
    assert flat[0] == 0 and flat[-1] == 3
    np.testing.assert_array_equal(concave_majorant([0, 1, 1.5, 1.75]), [0, 1, 1.5, 1.75])


def test_bound_values_xy():
    b = compute_bound([pauli("x"), pauli("y")])
    np.testing.assert_allclose(b.s, S_XY, atol=1e-9)
    assert b.method == "exhaustive" and b.exact
    # the quoted vector is also the raw increment sequence
    np.testing.assert_allclose(np.diff(b.raw_partial_sums), S_XY, atol=1e-9)


def test_bound_values_xyz():
    b = compute_bound(mub_family(2))
    np.testing.assert_allclose(b.s, S_XYZ, atol=1e-9)
    np.testing.assert_allclose(np.diff(b.raw_partial_sums), S_XYZ, atol=1e-9)


def test_bound_single_observable():
    for meas in (pauli("z"), mub_family(3)[1]):
        b = compute_bound([meas])
        want = np.zeros(meas.dim)
        want[0] = 1
        np.testing.assert_allclose(b.s, want, atol=1e-12)


def _brute_force_partial_sums(observables):
    pool = projector_pool(observables)
    m = pool.shape[0]
    out = np.zeros(m + 1)
    for k in range(1, m + 1):
        out[k] = max(np.linalg.eigvalsh(pool[list(c)].sum(axis=0))[-1]
                     for c in itertools.combinations(range(m), k))
    return out


def test_qutrit_mub_partial_sums():
    b = compute_bound(mub_family(3))
    assert b.partial_sums[4] == pytest.approx((3 + R5) / 2, abs=1e-9)
    assert b.partial_sums[8] == pytest.approx(4, abs=1e-9)
    np.testing.assert_allclose(b.raw_partial_sums, _brute_force_partial_sums(mub_family(3)), atol=1e-10)
    assert np.all(b.partial_sums >= b.raw_partial_sums - 1e-12)
    assert np.all(np.diff(b.s) <= 1e-12)


def test_bound_invariants_random_observables(rng):
    obs = [ProjectiveMeasurement(random_unitary(rng, 3)) for _ in range(3)]
    b = compute_bound(obs)
    np.testing.assert_allclose(b.raw_partial_sums[:-1], _brute_force_partial_sums(obs)[:-1], atol=1e-10)
    assert b.partial_sums[-1] == 3 and b.total == 3 and len(b) == 9
    assert np.all(np.diff(b.partial_sums) >= -1e-12)
    assert np.all(np.diff(b.s) <= 1e-12)


def test_bound_errors():
    with pytest.raises(DimensionError):
        compute_bound([pauli("x"), mub_family(3)[0]])
    with pytest.raises(PoolTooLargeError):
        compute_bound(mub_family(3) + mub_family(3))
    with pytest.raises(PoolTooLargeError):
        compute_bound(mub_family(2) * 3, method="exhaustive")
    with pytest.raises(DimensionError):
        compute_bound(mub_family(3), method="bloch")
    with pytest.raises(ValidationError):
        compute_bound([])
    with pytest.raises(ValueError):
        compute_bound([pauli("x")], method="magic")


def test_bound_validation():
    with pytest.raises(ValidationError):
        MajorizationBound(np.ones(2), np.array([0.0, 1.0, 0.5]), 1, np.zeros(3))
    with pytest.raises(ValidationError):
        MajorizationBound(np.ones(2), np.array([0.0, 1.0, 2.0]), 1, np.zeros(3))
    # the final partial sum is pinned to the observable count before flattening
    b = bound_from_partial_sums([0, 0.9, 2.1], 2)
    np.testing.assert_allclose(b.partial_sums, [0, 1, 2], atol=1e-12)


def test_bloch_vectors():
    np.testing.assert_allclose(bloch_vectors(projector_pool([pauli("x")])), [[1, 0, 0], [-1, 0, 0]], atol=1e-14)


@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_bloch_planar_equals_exhaustive(n, seed):
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, np.pi, n)
    obs = [bloch_measurement([np.cos(a), 0.0, np.sin(a)]) for a in t]
    ex = compute_bound(obs, method="exhaustive")
    bl = compute_bound(obs, method="bloch")
    assert bl.method == "bloch-planar" and bl.exact
    np.testing.assert_allclose(bl.raw_partial_sums, ex.raw_partial_sums, atol=1e-10)


@given(st.integers(3, 6), st.integers(0, 2 ** 32 - 1))
def test_bloch_ascent_never_exceeds_exhaustive(n, seed):
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n, 3))
    obs = [bloch_measurement(d / np.linalg.norm(d)) for d in dirs]
    ex = compute_bound(obs, method="exhaustive")
    bl = compute_bound(obs, method="bloch")
    assert bl.method == "bloch-ascent" and not bl.exact
    assert np.all(bl.raw_partial_sums <= ex.raw_partial_sums + 1e-10)
    # on pools this small the ascent reaches the optimum
    np.testing.assert_allclose(bl.raw_partial_sums, ex.raw_partial_sums, atol=1e-9)


def test_bloch_ascent_matches_known_pools():
    for obs in (mub_family(2), icosahedron_family()):
        ex = compute_bound(obs, method="exhaustive")
        bl = compute_bound(obs, method="bloch")
        np.testing.assert_allclose(bl.partial_sums, ex.partial_sums, atol=1e-9)


@pytest.mark.parametrize("obs_name", ["xy", "mub2", "mub3", "icosa"])
def test_bound_soundness_random_pure_states(obs_name, rng):
    obs = {"xy": [pauli("x"), pauli("y")], "mub2": mub_family(2), "mub3": mub_family(3),
           "icosa": icosahedron_family()}[obs_name]
    b = compute_bound(obs)
    d = obs[0].dim
    for _ in range(200):
        psi = random_pure(rng, d)
        rho = DensityMatrix(np.outer(psi, psi.conj()))
        v = direct_sum([born_probabilities(rho, o) for o in obs])
        assert np.all(partial_sums(v) <= b.partial_sums + 1e-9)


def test_doubly_stochastic():
    assert is_doubly_stochastic(np.eye(3))
    assert is_doubly_stochastic(np.full((4, 4), 0.25))
    assert not is_doubly_stochastic(np.ones((2, 3)) / 2)
    assert not is_doubly_stochastic([[1.2, -0.2], [-0.2, 1.2]])
    assert not is_doubly_stochastic([[0.5, 0.5], [0.4, 0.6]])


@given(st.integers(2, 5), st.integers(0, 2 ** 32 - 1))
def test_doubly_stochastic_closure(n, seed):
    rng = np.random.default_rng(seed)

    def birkhoff():
        return sum(w * np.eye(n)[rng.permutation(n)] for w in rng.dirichlet(np.ones(3)))

    d1, d2 = birkhoff(), birkhoff()
    assert is_doubly_stochastic(d1 @ d2)
    assert is_doubly_stochastic(np.block([[d1 / 2, d1 / 2], [d1 / 2, d1 / 2]]))
