import itertools

import numpy as np
import pytest

from qmagic.errors import DimensionError, ValidationError
from qmagic.families import (
    QUTRIT_MUB_PHASE,
    SX,
    SY,
    SZ,
    bloch_measurement,
    ghz,
    isotropic_qutrit,
    mub_family,
    pauli,
    singlet,
    state_family,
    werner_qubit,
    werner_qutrit,
)
from qmagic.quantum import DensityMatrix, born_probabilities, joint_distribution, product_expectation


def test_werner_qubit_endpoints():
    np.testing.assert_allclose(werner_qubit(0).matrix, np.eye(4) / 4, atol=1e-15)
    np.testing.assert_allclose(werner_qubit(1).matrix, singlet().matrix, atol=1e-15)
    with pytest.raises(ValidationError):
        werner_qubit(1.1)
    with pytest.raises(ValidationError):
        werner_qubit(-0.1)


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.77, 1.0])
def test_werner_qutrit_explicit_matrix(eta):
    # 9x9 form: (1-eta)/9 on |ii>, (2+eta)/18 on |ij>, -eta/6 between |ij> and |ji>
    want = np.zeros((9, 9))
    for i, j in itertools.product(range(3), repeat=2):
        r = 3 * i + j
        want[r, r] = (1 - eta) / 9 if i == j else (2 + eta) / 18
        if i != j:
            want[r, 3 * j + i] = -eta / 6
    np.testing.assert_allclose(werner_qutrit(eta).matrix, want, atol=1e-15)


@pytest.mark.parametrize("eta", [0.0, 0.48, 1.0])
def test_isotropic_qutrit_explicit_matrix(eta):
    m = isotropic_qutrit(eta).matrix
    diag_ii = [0, 4, 8]
    for r in range(9):
        want = (1 + 2 * eta) / 9 if r in diag_ii else (1 - eta) / 9
        assert m[r, r].real == pytest.approx(want, abs=1e-15)
    for r, c in itertools.permutations(diag_ii, 2):
        assert m[r, c].real == pytest.approx(eta / 3, abs=1e-15)
    mask = np.ones((9, 9), bool)
    mask[np.ix_(diag_ii, diag_ii)] = False
    mask[np.diag_indices(9)] = False
    assert np.abs(m[mask]).max() == 0


def test_werner_common_axis_rows():
    eta = 0.37
    for axis in "xyz":
        p = joint_distribution(werner_qubit(eta), [pauli(axis), pauli(axis)])
        np.testing.assert_allclose(np.sort(p, axis=1), [[(1 - eta) / 4, (1 + eta) / 4]] * 2, atol=1e-14)


def test_ghz_eigen_relations():
    x, y = pauli("x"), pauli("y")
    state = ghz()
    assert product_expectation(state, [x, y, y]) == pytest.approx(-1, abs=1e-12)
    assert product_expectation(state, [y, x, y]) == pytest.approx(-1, abs=1e-12)
    assert product_expectation(state, [y, y, x]) == pytest.approx(-1, abs=1e-12)
    assert product_expectation(state, [x, x, x]) == pytest.approx(1, abs=1e-12)
    # the opposite relative sign flips every relation
    assert product_expectation(ghz(-1), [x, x, x]) == pytest.approx(-1, abs=1e-12)


def test_state_family_lookup():
    np.testing.assert_allclose(state_family("werner2", eta=0.5).matrix, werner_qubit(0.5).matrix)
    with pytest.raises(ValueError):
        state_family("nope")


def _overlaps(a, b):
    return np.abs(a.vectors.conj().T @ b.vectors) ** 2


@pytest.mark.parametrize("dim", [2, 3])
def test_mub_unbiased(dim):
    fam = mub_family(dim)
    assert len(fam) == dim + 1
    for i, a in enumerate(fam):
        np.testing.assert_allclose(_overlaps(a, a), np.eye(dim), atol=1e-10)
        for b in fam[i + 1:]:
            np.testing.assert_allclose(_overlaps(a, b), np.full((dim, dim), 1 / dim), atol=1e-10)
    with pytest.raises(DimensionError):
        mub_family(4)


def test_qutrit_mub_phase():
    assert QUTRIT_MUB_PHASE == pytest.approx(2 * np.pi / 3)


def test_pauli_observables():
    for axis, mat in zip("xyz", (SX, SY, SZ)):
        np.testing.assert_allclose(pauli(axis).observable, mat, atol=1e-14)
    with pytest.raises(ValueError):
        pauli("w")


def test_bloch_measurement():
    np.testing.assert_allclose(bloch_measurement([0, 0, 1]).observable, SZ, atol=1e-14)
    np.testing.assert_allclose(bloch_measurement([1, 0, 0]).observable, SX, atol=1e-14)
    n = np.array([0.3, -0.4, np.sqrt(1 - 0.25)])
    np.testing.assert_allclose(bloch_measurement(n).observable, n[0] * SX + n[1] * SY + n[2] * SZ,
                               atol=1e-14)
    with pytest.raises(ValidationError):
        bloch_measurement([0, 0, 0])
    with pytest.raises(ValidationError):
        bloch_measurement([0, 0, 2])


@pytest.mark.parametrize("theta", [0.0, 0.4, 1.3, np.pi / 2, 2.9])
def test_bloch_overlap_cos_half_angle(theta):
    a = bloch_measurement([0, 0, 1])
    b = bloch_measurement([np.sin(theta), 0, np.cos(theta)])
    ov = abs(np.vdot(a.vectors[:, 0], b.vectors[:, 0])) ** 2
    assert ov == pytest.approx(np.cos(theta / 2) ** 2, abs=1e-14)
    # same number via the Born rule on the +1 eigenstate
    up = DensityMatrix(a.projectors[0])
    assert born_probabilities(up, b)[0] == pytest.approx(np.cos(theta / 2) ** 2, abs=1e-14)
