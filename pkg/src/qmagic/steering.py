"""Conditional-majorization steering criterion and its measurement families.

If A cannot steer B then, for measurement pairs (X_i, Y_i), the direct sum
over i of ``sum_j q(y | x_j)^desc p(x_j)`` is majorized by the uncertainty
bound of the Y_i.  A violation certifies steering; holding is only a
necessary condition for non-steerability.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from ._config import TOL
from .errors import DimensionError, NonMonotoneError, ValidationError
from .families import bloch_measurement
from .majorization import MajorizationBound, compute_bound, majorizes, partial_sums
from .quantum import DensityMatrix, ProjectiveMeasurement, joint_distributions_batch

__all__ = [
    "SteeringScenario",
    "CriterionReport",
    "theorem1_lhs",
    "theorem1_blocks",
    "lhs_from_joints",
    "scenario_bound",
    "steering_check",
    "evaluate",
    "threshold_scan",
    "two_way_check",
    "same_pairs",
    "conjugate_pairs",
    "planar_family",
    "icosahedron_family",
    "sphere_family",
    "planar_quadrature",
    "sphere_quadrature",
    "continuum_threshold",
    "extrapolate_limit",
    "DIRECTIONS",
]

DIRECTIONS = ("A->B", "B->A")
GRID_POINTS = 101


@dataclasses.dataclass(frozen=True)
class SteeringScenario:
    """Bipartite state, measurement pairs (on A, on B) and steering direction."""

    state: DensityMatrix
    pairs: tuple
    direction: str = "A->B"
    _groups: tuple = dataclasses.field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        pairs = tuple((a, b) for a, b in self.pairs)
        if not pairs:
            raise ValidationError("need at least one measurement pair")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        for i, (a, b) in enumerate(pairs):
            if not (isinstance(a, ProjectiveMeasurement) and isinstance(b, ProjectiveMeasurement)):
                raise ValidationError(f"pair {i} must hold two ProjectiveMeasurement objects")
        # pairs grouped by (dim_A, dim_B) with stacked bases, for batching
        groups: dict = {}
        for i, (a, b) in enumerate(pairs):
            groups.setdefault((a.dim, b.dim), []).append(i)
        stacked = tuple((np.array(idx), np.stack([pairs[i][0].vectors for i in idx]),
                         np.stack([pairs[i][1].vectors for i in idx]))
                        for idx in groups.values())
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "_groups", stacked)
        self._check_state(self.state)

    def _check_state(self, state):
        if state.n_parties != 2:
            raise DimensionError("steering needs a bipartite state")
        da, db = state.party_dims
        for idx, va, vb in self._groups:
            if va.shape[1] != da or vb.shape[1] != db:
                raise DimensionError(
                    f"pairs {idx.tolist()}: dims ({va.shape[1]}, {vb.shape[1]}) vs state ({da}, {db})")

    @property
    def steered_observables(self) -> list[ProjectiveMeasurement]:
        side = 1 if self.direction == "A->B" else 0
        return [p[side] for p in self.pairs]

    def with_state(self, state: DensityMatrix) -> "SteeringScenario":
        """Same pairs and direction, new state (pairs are not re-validated)."""
        self._check_state(state)
        clone = object.__new__(SteeringScenario)
        for f in ("pairs", "direction", "_groups"):
            object.__setattr__(clone, f, getattr(self, f))
        object.__setattr__(clone, "state", state)
        return clone

    def reversed(self) -> "SteeringScenario":
        return SteeringScenario(self.state, self.pairs, DIRECTIONS[self.direction == "A->B"])


@dataclasses.dataclass(frozen=True)
class CriterionReport:
    """Outcome of one criterion evaluation.

    ``violation`` is ``max_k (LHS_k - S_k)``: positive exactly when the
    criterion fails (steering certified), non-positive otherwise.
    """

    lhs_sorted: np.ndarray
    bound: MajorizationBound
    holds: bool
    worst_k: int
    violation: float
    direction: str = "A->B"

    @property
    def lhs_partial_sums(self) -> np.ndarray:
        return partial_sums(self.lhs_sorted)

    def rows(self):
        """(k, lhs_partial, bound_partial, slack) for k = 1..K."""
        lp = self.lhs_partial_sums
        bp = self.bound.partial_sums
        return [(k, float(lp[k]), float(bp[k]), float(bp[k] - lp[k])) for k in range(1, lp.size)]


def lhs_from_joints(joints) -> np.ndarray:
    """Sorted direct sum of ``sum_j sort_desc(P_i[j, :])`` over tables ``P_i``.

    ``joints`` has shape (M, N_cond, N_steered): rows index the conditioning
    outcome, columns the steered party's outcome.
    """
    p = np.asarray(joints, dtype=float)
    if p.ndim != 3:
        raise DimensionError("joints must have shape (M, N_cond, N_steered)")
    lhs = (-np.sort(-p, axis=2)).sum(axis=1).ravel()
    return -np.sort(-lhs)


def _grouped_blocks(scenario: SteeringScenario):
    """(pair indices, blocks) per group; block = sum_j sort_desc(P[j, :])."""
    out = []
    for idx, va, vb in scenario._groups:
        p = joint_distributions_batch(scenario.state, va, vb)
        if scenario.direction == "B->A":
            p = p.transpose(0, 2, 1)
        out.append((idx, (-np.sort(-p, axis=2)).sum(axis=1)))
    return out


def theorem1_blocks(scenario: SteeringScenario) -> list[np.ndarray]:
    """One block per pair, in pair order: ``sum_j sort_desc(P[j, :])``.

    ``P`` is the joint table oriented (conditioning party, steered party).
    Sorting the unnormalized row ``P[j, :] = p(x_j) q(. | x_j)`` equals
    weighting the sorted conditional, and a zero-probability row adds zero.
    """
    out: list = [None] * len(scenario.pairs)
    for idx, blocks in _grouped_blocks(scenario):
        for i, blk in zip(idx, blocks):
            out[i] = blk
    return out


def theorem1_lhs(scenario: SteeringScenario) -> np.ndarray:
    """Direct sum of the blocks, sorted descending."""
    lhs = np.concatenate([blocks.ravel() for _, blocks in _grouped_blocks(scenario)])
    return -np.sort(-lhs)


def scenario_bound(scenario: SteeringScenario, method: str = "auto") -> MajorizationBound:
    return compute_bound(scenario.steered_observables, method=method)


def evaluate(scenario: SteeringScenario, bound: MajorizationBound) -> CriterionReport:
    """Criterion against a precomputed bound (lets scans reuse one bound)."""
    lhs = theorem1_lhs(scenario)
    holds, worst_k, slack = majorizes(lhs, bound)
    return CriterionReport(lhs, bound, holds, worst_k, -slack, scenario.direction)


def steering_check(scenario: SteeringScenario, method: str = "auto") -> CriterionReport:
    """Evaluate the criterion; ``holds = False`` certifies steerability."""
    return evaluate(scenario, scenario_bound(scenario, method))


def threshold_scan(family: Callable[[float], DensityMatrix], pairs, direction: str = "A->B",
                   tol: float | None = None, grid: int = GRID_POINTS,
                   bound: MajorizationBound | None = None, method: str = "auto") -> float:
    """Largest eta in [0, 1] at which the criterion holds.

    The criterion is first evaluated on a uniform grid to confirm it switches
    from holding to failing at most once with non-decreasing violation; then
    the switch is bisected to ``tol``.  Returns 1.0 if it holds at eta = 1.

    Raises
    ------
    NonMonotoneError
        If the grid shows the criterion is not monotone in eta.
    """
    tol = TOL.bisection if tol is None else tol
    base = SteeringScenario(family(0.0), pairs, direction)
    if bound is None:
        bound = scenario_bound(base, method)

    def report(eta):
        return evaluate(base.with_state(family(eta)), bound)

    etas = np.linspace(0.0, 1.0, grid)
    reps = [report(e) for e in etas]
    holds = np.array([r.holds for r in reps])
    viol = np.array([r.violation for r in reps])
    if np.any(np.diff(viol) < -TOL.majorization) or np.any(holds[1:] & ~holds[:-1]):
        bad = int(np.argmax(np.diff(viol) < -TOL.majorization))
        raise NonMonotoneError(f"criterion is not monotone in eta near {etas[bad]:.3f}")
    if holds[-1]:
        return 1.0
    if not holds[0]:
        return 0.0
    i = int(np.argmin(holds))
    lo, hi = etas[i - 1], etas[i]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if report(mid).holds:
            lo = mid
        else:
            hi = mid
    return float(lo)


def two_way_check(state: DensityMatrix, pairs, method: str = "auto"):
    """Reports for A->B and B->A; both holding is necessary for separability."""
    ab = SteeringScenario(state, pairs, "A->B")
    return steering_check(ab, method), steering_check(ab.reversed(), method)


def same_pairs(measurements: Sequence[ProjectiveMeasurement]) -> list:
    """(M, M) pairs: perfect anticorrelation partners for Werner states."""
    return [(m, m) for m in measurements]


def conjugate_pairs(measurements: Sequence[ProjectiveMeasurement]) -> list:
    """(M, M*) pairs: perfect correlation partners for isotropic states."""
    return [(m, m.conjugate()) for m in measurements]


def _from_directions(dirs, prefix):
    return [bloch_measurement(d / np.linalg.norm(d), name=f"{prefix}_{i}") for i, d in enumerate(dirs)]


def planar_family(n: int) -> list[ProjectiveMeasurement]:
    """n Bloch directions at angles pi j / n in the x-y plane."""
    if n < 2:
        raise ValueError("planar family needs n >= 2")
    t = np.pi * np.arange(n) / n
    return _from_directions(np.stack([np.cos(t), np.sin(t), np.zeros(n)], axis=1), "planar")


def icosahedron_family() -> list[ProjectiveMeasurement]:
    """Six axes through antipodal vertex pairs of a regular icosahedron."""
    phi = (1 + np.sqrt(5)) / 2
    dirs = np.array([[0, 1, phi], [0, 1, -phi], [1, phi, 0],
                     [1, -phi, 0], [phi, 0, 1], [-phi, 0, 1]], dtype=float)
    return _from_directions(dirs, "icosa")


def sphere_family(n: int) -> list[ProjectiveMeasurement]:
    """n near-uniform axes: a Fibonacci spiral on the upper hemisphere."""
    if n < 3:
        raise ValueError("sphere family needs n >= 3")
    j = np.arange(n)
    z = (j + 0.5) / n
    r = np.sqrt(1 - z * z)
    phi = j * np.pi * (3 - np.sqrt(5))
    return _from_directions(np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1), "sphere")


def planar_quadrature() -> float:
    """Mean of cos^2(theta/2) over theta in [-pi/2, pi/2]."""
    val, _ = integrate.quad(lambda t: np.cos(t / 2) ** 2, -np.pi / 2, np.pi / 2, epsabs=1e-13)
    return val / np.pi


def sphere_quadrature() -> float:
    """Solid-angle mean of cos^2(theta/2) over a hemisphere."""
    val, _ = integrate.dblquad(lambda t, p: np.cos(t / 2) ** 2 * np.sin(t),
                               0, 2 * np.pi, 0, np.pi / 2, epsabs=1e-13)
    return val / (2 * np.pi)


def continuum_threshold(mean_overlap: float) -> float:
    """Werner threshold ``2 <cos^2> - 1`` implied by a continuum average."""
    return 2 * mean_overlap - 1


def extrapolate_limit(values: Sequence[float]) -> float:
    """Aitken/Richardson limit of a sequence at geometrically growing n.

    Uses the last three values; falls back to the last value when the
    differences do not shrink geometrically.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return float(v[-1])
    d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
    if d2 == 0 or d1 == 0 or d1 / d2 <= 1:
        return float(v[-1])
    return float(v[-1] + d2 / (d1 / d2 - 1))
