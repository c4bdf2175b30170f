import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from conftest import random_density, random_unitary
from qmagic.errors import NoSignallingError, ValidationError
from qmagic.families import pauli, product_state, singlet
from qmagic.feasibility import (
    CHSH_OPTIMAL_ANGLES,
    LinearFeasibilityProblem,
    bell_locality_decide,
    bell_locality_problem,
    check_no_signalling,
    chsh_from_joints,
    chsh_joints,
    chsh_max_over_tensors,
    chsh_optimal_joints,
    critical_visibility,
    ghz_contradiction_check,
    ghz_problem,
    ghz_relaxed_check,
    ghz_xxx_range,
    mix_with_noise,
    solve_feasibility,
    verify_certificate,
)
from qmagic.magic_square import (
    build_from_lhv,
    deterministic_tensor,
    marginal,
    parity_expectation,
    random_lhv_model,
)
from qmagic.quantum import DensityMatrix, ProjectiveMeasurement, joint_distribution

BI = ((2, 2), (2, 2))


def joints_of(tensor):
    ma, mb = tensor.meas_per_party
    return np.array([[marginal(tensor, [x, y]) for y in range(mb)] for x in range(ma)])


def test_solve_trivial_feasible():
    out = solve_feasibility(LinearFeasibilityProblem([[1, 1]], [1]))
    assert out.feasible and out.point.sum() == pytest.approx(1)


def test_solve_trivial_infeasible():
    prob = LinearFeasibilityProblem([[1.0]], [-1.0])
    out = solve_feasibility(prob)
    assert out.status == "infeasible"
    assert verify_certificate(prob, out.certificate)


def test_problem_validation():
    with pytest.raises(ValueError):
        LinearFeasibilityProblem([[1, 1]], [1, 2])
    with pytest.raises(ValidationError):
        LinearFeasibilityProblem([[np.nan]], [1])


def test_verify_certificate_rejects_bad_vectors():
    prob = LinearFeasibilityProblem([[1.0, 1.0]], [1.0])
    assert not verify_certificate(prob, [1.0])
    assert not verify_certificate(prob, [0.0])
    assert not verify_certificate(prob, [-1.0])


def test_deterministic_chsh_system_is_feasible():
    t = deterministic_tensor(BI, [0, 0, 0, 0])
    j = joints_of(t)
    assert chsh_from_joints(j) == pytest.approx(2)
    out = bell_locality_decide(j)
    assert out.feasible
    np.testing.assert_allclose(joints_of(out.tensor), j, atol=1e-8)


def test_product_state_joints_feasible(rng):
    state = product_state(DensityMatrix(random_density(rng, 2)), DensityMatrix(random_density(rng, 2)))
    j = chsh_joints(state, rng.uniform(0, 2 * np.pi, 4))
    assert bell_locality_decide(j).feasible


def test_singlet_optimal_infeasible():
    j = chsh_optimal_joints()
    assert chsh_from_joints(j) == pytest.approx(2 * np.sqrt(2), abs=1e-12)
    prob = bell_locality_problem(j)
    out = bell_locality_decide(j)
    assert out.status == "infeasible"
    assert verify_certificate(prob, out.certificate)
    # the certificate combines the marginal equations into a CHSH-type contradiction
    assert out.certificate @ prob.b_eq > 0.1


def test_optimal_angles_match_named_settings():
    r = 1 / np.sqrt(2)
    a = [pauli("z"), pauli("x")]
    b = [ProjectiveMeasurement.from_observable(-(pauli("z").observable + pauli("x").observable) * r),
         ProjectiveMeasurement.from_observable((pauli("z").observable - pauli("x").observable) * r)]
    want = np.array([[joint_distribution(singlet(), [ax, by]) for by in b] for ax in a])
    np.testing.assert_allclose(chsh_joints(singlet(), CHSH_OPTIMAL_ANGLES), want, atol=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5))
def test_lhv_round_trip(seed, n_lambda):
    rng = np.random.default_rng(seed)
    model = random_lhv_model(rng, ((3, 3), (2, 2, 2)), n_lambda)
    j = joints_of(build_from_lhv(model))
    out = bell_locality_decide(j)
    assert out.feasible
    np.testing.assert_allclose(joints_of(out.tensor), j, atol=1e-8)


def test_no_signalling_rejected():
    j = joints_of(deterministic_tensor(BI, [0, 0, 0, 0])).copy()
    j[0, 1] = [[0, 0], [1, 0]]  # A's marginal for x=0 now depends on y
    with pytest.raises(NoSignallingError):
        bell_locality_decide(j)
    with pytest.raises(ValidationError):
        check_no_signalling(j * 2)


def _local_by_highs(j):
    prob = bell_locality_problem(j)
    res = linprog(np.zeros(prob.variable_count), A_eq=prob.a_eq, b_eq=prob.b_eq,
                  bounds=(0, None), method="highs")
    return res.status == 0


def _chsh_variants(j):
    e = j[..., 0, 0] - j[..., 0, 1] - j[..., 1, 0] + j[..., 1, 1]
    vals = []
    for x, y in itertools.product(range(2), repeat=2):
        signs = np.ones((2, 2))
        signs[x, y] = -1
        vals.append(abs(np.sum(signs * e)))
    return max(vals)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.3, 1.0))
def test_locality_matches_highs_and_chsh_facets(seed, v):
    rng = np.random.default_rng(seed)
    state = DensityMatrix(random_density(rng, 4, rank=1), (2, 2))
    a = [ProjectiveMeasurement(random_unitary(rng, 2)) for _ in range(2)]
    b = [ProjectiveMeasurement(random_unitary(rng, 2)) for _ in range(2)]
    j = mix_with_noise(np.array([[joint_distribution(state, [ax, by]) for by in b] for ax in a]), v)
    s = _chsh_variants(j)
    if abs(s - 2) < 1e-6:
        return
    ours = bell_locality_decide(j).feasible
    # two independent routes: HiGHS on the same constraints, and the CHSH facets
    assert ours == _local_by_highs(j)
    assert ours == (s <= 2)


def test_ghz_full_system_infeasible():
    prob = ghz_problem()
    out = ghz_contradiction_check()
    assert out.status == "infeasible"
    assert verify_certificate(prob, out.certificate)


def test_ghz_relaxed_forces_xxx():
    out = ghz_relaxed_check()
    assert out.feasible
    assert parity_expectation(out.tensor, "XXX") == pytest.approx(-1, abs=1e-8)
    lo, hi = ghz_xxx_range()
    assert lo == pytest.approx(-1, abs=1e-8) and hi == pytest.approx(-1, abs=1e-8)


def test_ghz_all_plus_feasible():
    prob = ghz_problem({"XYY": 1, "YXY": 1, "YYX": 1, "XXX": 1})
    out = solve_feasibility(prob)
    assert out.feasible
    # explicit witness: every outcome +1
    w = deterministic_tensor(((2, 2),) * 3, [0] * 6).values.ravel()
    np.testing.assert_allclose(prob.a_eq @ w, prob.b_eq)


def test_chsh_lp_optimum():
    assert chsh_max_over_tensors() == pytest.approx(2, abs=1e-8)
    assert chsh_max_over_tensors(minimize=True) == pytest.approx(-2, abs=1e-8)
    assert chsh_from_joints(chsh_optimal_joints()) > chsh_max_over_tensors() + 0.8


def test_noise_threshold_and_monotonicity():
    j = chsh_optimal_joints()
    v = critical_visibility(j, tol=1e-6)
    # S(v) = 2 sqrt(2) v crosses 2 at v = 1/sqrt(2)
    assert v == pytest.approx(1 / np.sqrt(2), abs=1e-5)
    grid = np.linspace(0, 1, 41)
    feas = [bell_locality_decide(mix_with_noise(j, w)).feasible for w in grid]
    first_bad = feas.index(False)
    assert all(feas[:first_bad]) and not any(feas[first_bad:])
    with pytest.raises(ValidationError):
        mix_with_noise(j, 1.5)


def test_critical_visibility_of_local_joints():
    j = joints_of(deterministic_tensor(BI, [0, 1, 1, 0]))
    assert critical_visibility(j) == 1.0
