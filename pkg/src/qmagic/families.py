"""Canonical states and measurements: Werner, isotropic, GHZ, Pauli, MUB, Bloch."""

from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import DimensionError, ValidationError
from .quantum import DensityMatrix, ProjectiveMeasurement

__all__ = [
    "singlet",
    "werner_qubit",
    "werner_qutrit",
    "isotropic_qutrit",
    "isotropic_qubit",
    "isotropic",
    "ghz",
    "maximally_mixed",
    "product_state",
    "state_family",
    "STATE_FAMILIES",
    "pauli",
    "bloch_measurement",
    "mub_family",
    "QUTRIT_MUB_PHASE",
]

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

QUTRIT_MUB_PHASE = 2.0 * np.pi / 3.0


def _check_eta(eta):
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"eta must lie in [0, 1], got {eta}")
    return eta


def singlet() -> DensityMatrix:
    """|psi-> = (|01> - |10>)/sqrt(2)."""
    return DensityMatrix.from_vector(np.array([0, 1, -1, 0]) / np.sqrt(2), (2, 2))


def werner_qubit(eta) -> DensityMatrix:
    """(1 - eta)/4 * 1 + eta |psi-><psi-|."""
    eta = _check_eta(eta)
    return DensityMatrix((1 - eta) / 4 * np.eye(4) + eta * singlet().matrix, (2, 2))


def _antisymmetric_projector(d):
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    return 0.5 * (np.eye(d * d) - swap)


def werner_qutrit(eta) -> DensityMatrix:
    """(1 - eta)/9 * 1 + (eta/3) * sum_{i<j} |psi-_ij><psi-_ij|.

    Diagonal ``(1-eta)/9`` on |ii>, ``(2+eta)/18`` on |ij>, and ``-eta/6``
    coupling |ij> with |ji>.
    """
    eta = _check_eta(eta)
    return DensityMatrix((1 - eta) / 9 * np.eye(9) + eta / 3 * _antisymmetric_projector(3), (3, 3))


def isotropic(dim: int, eta) -> DensityMatrix:
    """(1 - eta)/d^2 * 1 + eta |psi+><psi+|, |psi+> = sum_i |ii>/sqrt(d)."""
    eta = _check_eta(eta)
    psi = np.zeros(dim * dim)
    psi[:: dim + 1] = 1.0 / np.sqrt(dim)
    mat = (1 - eta) / dim ** 2 * np.eye(dim * dim) + eta * np.outer(psi, psi)
    return DensityMatrix(mat, (dim, dim))


def isotropic_qutrit(eta) -> DensityMatrix:
    return isotropic(3, eta)


def isotropic_qubit(eta) -> DensityMatrix:
    return isotropic(2, eta)


def ghz(sign: int = +1) -> DensityMatrix:
    """(|000> + sign |111>)/sqrt(2).

    With the default sign the state is a +1 eigenvector of XXX and a -1
    eigenvector of XYY, YXY and YYX.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    psi = np.zeros(8)
    psi[0], psi[7] = 1.0, float(sign)
    return DensityMatrix.from_vector(psi / np.sqrt(2), (2, 2, 2))


def maximally_mixed(party_dims) -> DensityMatrix:
    d = int(np.prod(party_dims))
    return DensityMatrix(np.eye(d) / d, party_dims)


def product_state(*states: DensityMatrix) -> DensityMatrix:
    mat = reduce(np.kron, [s.matrix for s in states])
    dims = [d for s in states for d in s.party_dims]
    return DensityMatrix(mat, dims)


STATE_FAMILIES = {
    "werner2": werner_qubit,
    "werner3": werner_qutrit,
    "isotropic2": isotropic_qubit,
    "isotropic3": isotropic_qutrit,
    "singlet": singlet,
    "ghz": ghz,
}


def state_family(name: str, **params) -> DensityMatrix:
    """Look up a state constructor by name (``werner2``, ``isotropic3``, ...)."""
    try:
        ctor = STATE_FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown state family {name!r}; known: {sorted(STATE_FAMILIES)}") from None
    return ctor(**params)


def bloch_measurement(direction, name=None) -> ProjectiveMeasurement:
    """Qubit measurement of ``n . sigma`` for a unit Bloch vector ``n``."""
    n = np.asarray(direction, dtype=float)
    if n.shape != (3,):
        raise DimensionError("direction must be a 3-vector")
    norm = np.linalg.norm(n)
    if norm < 1e-12:
        raise ValidationError("direction is the zero vector")
    if abs(norm - 1.0) > 1e-9:
        raise ValidationError(f"direction must be a unit vector (norm {norm:.12g})")
    n = n / norm
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    up = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    down = np.array([-np.exp(-1j * phi) * np.sin(theta / 2), np.cos(theta / 2)])
    return ProjectiveMeasurement(np.stack([up, down], axis=1), [1.0, -1.0], name)


def pauli(axis: str) -> ProjectiveMeasurement:
    axis = axis.lower()
    vec = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}.get(axis)
    if vec is None:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return bloch_measurement(vec, name=f"sigma_{axis}")


def _qutrit_mub(omega):
    e = lambda s: np.exp(1j * s * omega)  # noqa: E731
    r = 1 / np.sqrt(3)
    return [
        np.eye(3, dtype=complex),
        r * np.array([[1, e(-1), e(1)], [1, e(1), e(-1)], [1, 1, 1]]),
        r * np.array([[e(-1), e(1), 1], [e(-1), 1, e(1)], [1, 1, 1]]),
        r * np.array([[e(1), 1, e(-1)], [e(1), e(-1), 1], [1, 1, 1]]),
    ]


def mub_family(dim: int) -> list[ProjectiveMeasurement]:
    """Complete set of mutually unbiased bases for ``dim`` in {2, 3}.

    dim 2: sigma_x, sigma_y, sigma_z.  dim 3: the computational basis and
    three Fourier-type bases whose columns carry phases exp(+-i 2pi/3).
    """
    if dim == 2:
        return [pauli("x"), pauli("y"), pauli("z")]
    if dim == 3:
        return [ProjectiveMeasurement(b, [1.0, 0.0, -1.0], name=f"mub3_{k}")
                for k, b in enumerate(_qutrit_mub(QUTRIT_MUB_PHASE))]
    raise DimensionError(f"MUB family only for dim 2 or 3, got {dim}")
