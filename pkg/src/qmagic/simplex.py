"""Dense two-phase primal simplex for ``A x = b, x >= 0``.

Bland's rule is used for both entering and leaving choices, so the method
cannot cycle; an iteration cap turns pathological inputs into an explicit
:class:`SolverError` instead of a wrong answer.

Phase 1 minimizes the sum of artificial variables.  When its optimum is
positive the duals of that phase give a Farkas vector ``y`` with
``y^T A <= 0`` and ``y^T b > 0``.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import DimensionError, SolverError

__all__ = ["LpResult", "solve_lp", "MAX_ITER", "PIVOT_EPS"]

MAX_ITER = 1_000_000
PIVOT_EPS = 1e-11
PHASE1_EPS = 1e-9


@dataclasses.dataclass(frozen=True)
class LpResult:
    """Outcome of :func:`solve_lp`.

    ``status`` is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.  ``x``
    is set when a feasible point was found, ``farkas`` when infeasible.
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    farkas: np.ndarray | None
    iterations: int


def _pivot(t, row, col):
    t[row] /= t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0.0
    t -= np.outer(factor, t[row])


def _run(t, basis, n_cols, it, max_iter):
    """Bland-rule iterations on tableau ``t`` (last row = reduced costs).

    Only the first ``n_cols`` columns may enter.  Returns ("optimal" |
    "unbounded", iterations, unbounded column).
    """
    m = t.shape[0] - 1
    while True:
        cost = t[m, :n_cols]
        cand = np.flatnonzero(cost < -PIVOT_EPS)
        if cand.size == 0:
            return "optimal", it, -1
        if it >= max_iter:
            raise SolverError(f"simplex hit the iteration cap ({max_iter})")
        col = int(cand[0])
        colv = t[:m, col]
        pos = np.flatnonzero(colv > PIVOT_EPS)
        if pos.size == 0:
            return "unbounded", it, col
        ratios = t[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(ties[np.argmin(basis[ties])])
        _pivot(t, row, col)
        basis[row] = col
        it += 1


def solve_lp(a_eq, b_eq, c=None, maximize: bool = False, max_iter: int = MAX_ITER) -> LpResult:
    """Minimize (or maximize) ``c . x`` subject to ``a_eq x = b_eq, x >= 0``.

    With ``c`` omitted only feasibility is decided.

    Parameters
    ----------
    a_eq : (m, n) array_like
    b_eq : (m,) array_like
    c : (n,) array_like, optional
    maximize : bool
    max_iter : int
        Total pivot budget across both phases.

    Returns
    -------
    LpResult
    """
    a = np.atleast_2d(np.asarray(a_eq, dtype=float))
    b = np.asarray(b_eq, dtype=float).ravel()
    m, n = a.shape
    if b.size != m:
        raise DimensionError(f"{m} constraint rows but {b.size} right-hand sides")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DimensionError("constraint data must be finite")
    cost = np.zeros(n) if c is None else np.asarray(c, dtype=float).ravel()
    if cost.size != n:
        raise DimensionError(f"objective has {cost.size} entries for {n} variables")
    if maximize:
        cost = -cost

    sign = np.where(b < 0, -1.0, 1.0)
    a = a * sign[:, None]
    b = b * sign

    # [A | I | b] with the phase-1 reduced-cost row below
    t = np.zeros((m + 1, n + m + 1))
    t[:m, :n] = a
    t[:m, n:n + m] = np.eye(m)
    t[:m, -1] = b
    t[m, :n] = -a.sum(axis=0)
    t[m, -1] = -b.sum()
    basis = np.arange(n, n + m)

    _, it, _ = _run(t, basis, n + m, 0, max_iter)
    phase1 = -t[m, -1]
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if phase1 > PHASE1_EPS * scale:
        # phase-1 duals y = c_B B^-1; B^-1 sits under the artificial block
        c_b = (basis >= n).astype(float)
        y = c_b @ t[:m, n:n + m]
        return LpResult("infeasible", None, None, y * sign, it)

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < n:
            continue
        nz = np.flatnonzero(np.abs(t[r, :n]) > 1e-9)
        if nz.size:
            _pivot(t, r, int(nz[0]))
            basis[r] = int(nz[0])
        else:
            keep[r] = False
    rows = np.flatnonzero(keep)
    t2 = np.zeros((rows.size + 1, n + 1))
    t2[:-1, :n] = t[rows, :n]
    t2[:-1, -1] = t[rows, -1]
    basis = basis[rows]
    t2[-1, :n] = cost
    for r, j in enumerate(basis):
        if cost[j] != 0.0:
            t2[-1] -= cost[j] * t2[r]

    status, it, _ = _run(t2, basis, n, it, max_iter)
    x = np.zeros(n)
    x[basis] = t2[:-1, -1]
    x[x < 0] = 0.0
    if status == "unbounded":
        return LpResult("unbounded", x, None, None, it)
    obj = float(cost @ x)
    return LpResult("optimal", x, -obj if maximize else obj, None, it)
