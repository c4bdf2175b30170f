"""Existence of a magic-square tensor with prescribed marginals or parities.

Each decision is a linear feasibility problem over the tensor cells.  A
"feasible" answer carries a witness point and an "infeasible" answer carries
a Farkas certificate.  Both are checked here, independently of the solver.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ._config import TOL
from .errors import DimensionError, NoSignallingError, SolverError, ValidationError
from .families import bloch_measurement, singlet
from .magic_square import (
    MagicSquareTensor,
    chsh_coefficients,
    marginal_operator,
    parity_coefficients,
)
from .quantum import joint_distribution
from .simplex import solve_lp

__all__ = [
    "LinearFeasibilityProblem",
    "FeasibilityOutcome",
    "solve_feasibility",
    "verify_certificate",
    "bell_locality_problem",
    "bell_locality_decide",
    "check_no_signalling",
    "ghz_problem",
    "ghz_contradiction_check",
    "ghz_relaxed_check",
    "ghz_xxx_range",
    "chsh_max_over_tensors",
    "chsh_from_joints",
    "chsh_joints",
    "chsh_optimal_joints",
    "CHSH_OPTIMAL_ANGLES",
    "mix_with_noise",
    "critical_visibility",
]

GHZ_OUTCOMES = ((2, 2), (2, 2), (2, 2))
CHSH_OUTCOMES = ((2, 2), (2, 2))


@dataclasses.dataclass(frozen=True)
class LinearFeasibilityProblem:
    """``A x = b`` with ``x >= 0``.

    ``outcomes`` records the tensor layout when the variables are the cells
    of a magic-square tensor; it lets a witness be returned as a tensor.
    """

    a_eq: np.ndarray
    b_eq: np.ndarray
    outcomes: tuple | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a_eq, dtype=float))
        b = np.asarray(self.b_eq, dtype=float).ravel()
        if a.shape[0] != b.size:
            raise DimensionError(f"{a.shape[0]} rows but {b.size} right-hand sides")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("constraint data must be finite")
        if self.labels is not None and len(self.labels) != b.size:
            raise DimensionError("one label per constraint row")
        object.__setattr__(self, "a_eq", a)
        object.__setattr__(self, "b_eq", b)

    @property
    def variable_count(self) -> int:
        return self.a_eq.shape[1]


@dataclasses.dataclass(frozen=True)
class FeasibilityOutcome:
    """``status`` is ``"feasible"`` or ``"infeasible"``.

    ``point`` is the witness (with ``tensor`` when the layout is known);
    ``certificate`` is ``y`` with ``y^T A <= 0`` and ``y^T b > 0``,
    normalized to unit max-norm.  ``residual`` is the max constraint
    violation of the witness, or ``y^T b`` for a certificate.
    """

    status: str
    point: np.ndarray | None = None
    tensor: MagicSquareTensor | None = None
    certificate: np.ndarray | None = None
    residual: float = 0.0
    iterations: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def verify_certificate(problem: LinearFeasibilityProblem, y, tol: float | None = None) -> bool:
    """Check the Farkas conditions ``y^T A <= tol`` and ``y^T b > tol``."""
    tol = 1e-10 if tol is None else tol
    y = np.asarray(y, dtype=float)
    norm = np.abs(y).max(initial=0.0)
    if norm == 0:
        return False
    y = y / norm
    return bool((y @ problem.a_eq).max(initial=-np.inf) <= tol and y @ problem.b_eq > tol)


def _witness_residual(problem, x):
    return float(max(np.abs(problem.a_eq @ x - problem.b_eq).max(initial=0.0), -x.min(initial=0.0)))


def solve_feasibility(problem: LinearFeasibilityProblem) -> FeasibilityOutcome:
    """Decide feasibility and return an independently re-validated witness.

    Raises
    ------
    SolverError
        If the solver's witness or certificate fails re-validation, or the
        iteration cap is reached.
    """
    res = solve_lp(problem.a_eq, problem.b_eq)
    if res.status == "infeasible":
        y = res.farkas / np.abs(res.farkas).max()
        if not verify_certificate(problem, y):
            raise SolverError("infeasibility certificate failed verification")
        return FeasibilityOutcome("infeasible", certificate=y,
                                  residual=float(y @ problem.b_eq), iterations=res.iterations)
    x = res.x
    resid = _witness_residual(problem, x)
    if resid > TOL.feasibility:
        raise SolverError(f"witness violates constraints by {resid:.3e}")
    tensor = None
    if problem.outcomes is not None:
        tensor = MagicSquareTensor(x / x.sum(), problem.outcomes, tol=TOL.feasibility)
    return FeasibilityOutcome("feasible", point=x, tensor=tensor,
                              residual=resid, iterations=res.iterations)


def _as_joints(joints):
    p = np.asarray(joints, dtype=float)
    if p.ndim != 4:
        raise DimensionError("joints must have shape (M_A, M_B, N_A, N_B)")
    return p


def check_no_signalling(joints, tol: float | None = None) -> float:
    """Return the largest marginal disagreement; raise if above ``tol``."""
    tol = TOL.feasibility if tol is None else tol
    p = _as_joints(joints)
    if p.min() < -tol:
        raise ValidationError(f"negative joint probability {p.min():.3e}")
    norm = np.abs(p.sum(axis=(2, 3)) - 1).max()
    if norm > tol:
        raise ValidationError(f"joint distribution not normalized (off by {norm:.3e})")
    pa = p.sum(axis=3)  # (MA, MB, NA): A marginal must not depend on y
    pb = p.sum(axis=2)  # (MA, MB, NB): B marginal must not depend on x
    gap = max(np.abs(pa - pa[:, :1]).max(), np.abs(pb - pb[:1]).max())
    if gap > tol:
        raise NoSignallingError(f"single-party marginals disagree by {gap:.3e}")
    return float(gap)


def bell_locality_problem(joints) -> LinearFeasibilityProblem:
    """Cells of ``m[i_1..i_MA, j_1..j_MB]`` reproducing every ``P(x, y)``."""
    p = _as_joints(joints)
    ma, mb, na, nb = p.shape
    outcomes = ((na,) * ma, (nb,) * mb)
    rows, rhs, labels = [], [], []
    for x in range(ma):
        for y in range(mb):
            rows.append(marginal_operator(outcomes, [x, y]))
            rhs.append(p[x, y].ravel())
            labels += [f"P(a{i},b{j}|x{x},y{y})" for i in range(na) for j in range(nb)]
    return LinearFeasibilityProblem(np.vstack(rows), np.concatenate(rhs), outcomes, tuple(labels))


def bell_locality_decide(joints) -> FeasibilityOutcome:
    """Decide whether a local tensor reproduces the joint distributions.

    Parameters
    ----------
    joints : (M_A, M_B, N_A, N_B) array_like
        ``joints[x, y]`` is the joint distribution for settings ``x, y``.

    Raises
    ------
    NoSignallingError
        If single-party marginals depend on the remote setting.
    """
    check_no_signalling(joints)
    return solve_feasibility(bell_locality_problem(joints))


def ghz_problem(values: dict[str, float] | None = None) -> LinearFeasibilityProblem:
    """Tripartite tensor with prescribed parity expectations.

    ``values`` maps patterns such as ``"XYY"`` to their required value; the
    default is the full GHZ system XYY = YXY = YYX = -1, XXX = +1.
    """
    if values is None:
        values = {"XYY": -1.0, "YXY": -1.0, "YYX": -1.0, "XXX": 1.0}
    letters = {"X": 0, "Y": 1}
    rows = [np.ones(64)]
    rhs = [1.0]
    labels = ["normalization"]
    for pattern, val in values.items():
        choice = [letters[ch] for ch in pattern.upper()]
        rows.append(parity_coefficients(GHZ_OUTCOMES, choice).ravel())
        rhs.append(float(val))
        labels.append(f"<{pattern}>")
    return LinearFeasibilityProblem(np.array(rows), np.array(rhs), GHZ_OUTCOMES, tuple(labels))


def ghz_contradiction_check() -> FeasibilityOutcome:
    """The four GHZ parity constraints admit no local tensor."""
    return solve_feasibility(ghz_problem())


def ghz_relaxed_check() -> FeasibilityOutcome:
    """Only XYY = YXY = YYX = -1: feasible."""
    return solve_feasibility(ghz_problem({"XYY": -1.0, "YXY": -1.0, "YYX": -1.0}))


def ghz_xxx_range() -> tuple[float, float]:
    """(min, max) of <XXX> over tensors obeying the three relaxed constraints."""
    prob = ghz_problem({"XYY": -1.0, "YXY": -1.0, "YYX": -1.0})
    c = parity_coefficients(GHZ_OUTCOMES, [0, 0, 0]).ravel()
    lo = solve_lp(prob.a_eq, prob.b_eq, c)
    hi = solve_lp(prob.a_eq, prob.b_eq, c, maximize=True)
    if lo.status != "optimal" or hi.status != "optimal":
        raise SolverError("relaxed GHZ system did not solve to optimality")
    return lo.objective, hi.objective


def chsh_max_over_tensors(minimize: bool = False) -> float:
    """Optimum of S over all valid 2x2x2 tensors."""
    c = chsh_coefficients(CHSH_OUTCOMES).ravel()
    res = solve_lp(np.ones((1, 16)), [1.0], c, maximize=not minimize)
    if res.status != "optimal":
        raise SolverError(f"CHSH optimization ended with status {res.status}")
    return res.objective


def chsh_from_joints(joints) -> float:
    """S = E(x,y) - E(x,y') + E(x',y) + E(x',y') from 2x2x2x2 joints."""
    p = _as_joints(joints)
    if p.shape != (2, 2, 2, 2):
        raise DimensionError("CHSH needs joints of shape (2, 2, 2, 2)")
    e = p[..., 0, 0] - p[..., 0, 1] - p[..., 1, 0] + p[..., 1, 1]
    return float(e[0, 0] - e[0, 1] + e[1, 0] + e[1, 1])


CHSH_OPTIMAL_ANGLES = (0.0, np.pi / 2, -3 * np.pi / 4, -np.pi / 4)


def chsh_joints(state, angles) -> np.ndarray:
    """Joints for Bloch directions ``(sin t, 0, cos t)`` in the x-z plane.

    ``angles`` is ``(a, a', b, b')``; the result has shape (2, 2, 2, 2).
    """
    angles = [float(t) for t in angles]
    if len(angles) != 4:
        raise DimensionError("need four angles (a, a', b, b')")
    ms = [bloch_measurement([np.sin(t), 0.0, np.cos(t)]) for t in angles]
    return np.array([[joint_distribution(state, [ax, by]) for by in ms[2:]] for ax in ms[:2]])


def chsh_optimal_joints(state=None) -> np.ndarray:
    """Joints at the singlet-optimal settings.

    A measures sigma_z and sigma_x; B measures -(sigma_z + sigma_x)/sqrt(2)
    and (sigma_z - sigma_x)/sqrt(2), so the singlet reaches S = +2 sqrt(2).
    """
    return chsh_joints(singlet() if state is None else state, CHSH_OPTIMAL_ANGLES)


def mix_with_noise(joints, visibility: float) -> np.ndarray:
    """``v P + (1 - v) * uniform``."""
    p = _as_joints(joints)
    if not 0.0 <= visibility <= 1.0:
        raise ValidationError(f"visibility must lie in [0, 1], got {visibility}")
    uniform = 1.0 / (p.shape[2] * p.shape[3])
    return visibility * p + (1 - visibility) * uniform


def critical_visibility(joints, tol: float = 1e-6) -> float:
    """Largest visibility at which the noisy joints remain local (bisection).

    Returns 1.0 when the joints are already local.
    """
    if bell_locality_decide(joints).feasible:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bell_locality_decide(mix_with_noise(joints, mid)).feasible:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
