"""Probability tensors over one outcome per (party, measurement) pair.

A tensor ``m[i1, i2, j1, j2, ...]`` has one axis per (party, measurement),
ordered party-major then measurement-major.  Every observable joint
distribution is a partial sum of it, so its existence is the local-model
question in linear form.

For dichotomic measurements outcome index 0 carries the label +1 and index
1 the label -1; signed node sums are products of these labels.
"""

from __future__ import annotations

import dataclasses
import itertools
from typing import Mapping, Sequence

import numpy as np

from ._config import TOL
from .errors import DimensionError, ValidationError

__all__ = [
    "MagicSquareTensor",
    "LhvModel",
    "NodeSelection",
    "build_from_lhv",
    "marginal",
    "marginal_operator",
    "node_sum",
    "parity_selection",
    "correlation",
    "correlation_from_joint",
    "chsh_value",
    "chsh_coefficients",
    "parity_expectation",
    "parity_coefficients",
    "random_tensor",
    "random_lhv_model",
]

DICHOTOMIC_LABELS = np.array([1.0, -1.0])


def _normalize_outcomes(outcomes) -> tuple[tuple[int, ...], ...]:
    out = tuple(tuple(int(n) for n in party) for party in outcomes)
    if not out or any(not party for party in out):
        raise DimensionError("every party needs at least one measurement")
    if any(n < 1 for party in out for n in party):
        raise DimensionError("outcome counts must be positive")
    return out


def _axes(outcomes):
    """Flat axis index of every (party, measurement)."""
    axes, k = {}, 0
    for p, party in enumerate(outcomes):
        for m in range(len(party)):
            axes[p, m] = k
            k += 1
    return axes


class MagicSquareTensor:
    """Non-negative, normalized tensor with party-major axis layout.

    Parameters
    ----------
    values : array_like
        Dense values; reshaped to the layout implied by ``outcomes``.
    outcomes : sequence of sequences of int
        ``outcomes[p][m]`` is the number of outcomes of measurement ``m`` of
        party ``p``.
    """

    __slots__ = ("values", "outcomes")

    def __init__(self, values, outcomes, tol=None):
        outcomes = _normalize_outcomes(outcomes)
        shape = tuple(n for party in outcomes for n in party)
        v = np.asarray(values, dtype=float)
        if v.size != int(np.prod(shape)):
            raise DimensionError(f"{v.size} values do not fit layout {shape}")
        v = v.reshape(shape).copy()
        tol = TOL.validate if tol is None else tol
        if v.min() < -tol:
            raise ValidationError(f"negative entry {v.min():.3e}")
        total = v.sum()
        if abs(total - 1.0) > tol:
            raise ValidationError(f"entries sum to {total:.12g}, expected 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "outcomes", outcomes)

    def __setattr__(self, name, value):
        raise AttributeError("MagicSquareTensor is immutable")

    def __repr__(self):
        return f"MagicSquareTensor(outcomes={self.outcomes})"

    @property
    def parties(self) -> int:
        return len(self.outcomes)

    @property
    def meas_per_party(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.outcomes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def axis(self, party: int, meas: int) -> int:
        return _axes(self.outcomes)[party, meas]


@dataclasses.dataclass(frozen=True)
class LhvModel:
    """Finite local-hidden-variable model.

    ``distributions[p][m]`` is an (L, N) array: row ``lam`` is the outcome
    distribution of measurement ``m`` of party ``p`` given hidden value
    ``lam``.  ``hidden_states`` optionally carries one density matrix per
    ``lam`` for a party whose statistics come from a local quantum state.
    """

    weights: np.ndarray
    distributions: tuple
    hidden_states: np.ndarray | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DimensionError("weights must be a non-empty vector")
        if w.min() < -TOL.validate or abs(w.sum() - 1) > TOL.validate:
            raise ValidationError("weights must be a probability vector")
        dists = tuple(tuple(np.asarray(d, dtype=float) for d in party)
                      for party in self.distributions)
        for p, party in enumerate(dists):
            for m, d in enumerate(party):
                if d.ndim != 2 or d.shape[0] != w.size:
                    raise DimensionError(
                        f"distribution ({p}, {m}) must have shape ({w.size}, N), got {d.shape}")
                if d.min() < -TOL.validate or np.max(np.abs(d.sum(axis=1) - 1)) > TOL.validate:
                    raise ValidationError(f"distribution ({p}, {m}) is not normalized")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "distributions", dists)
        if self.hidden_states is not None:
            hs = np.asarray(self.hidden_states, dtype=complex)
            if hs.ndim != 3 or hs.shape[0] != w.size:
                raise DimensionError("need one hidden state per hidden value")
            object.__setattr__(self, "hidden_states", hs)

    @property
    def outcomes(self):
        return tuple(tuple(d.shape[1] for d in party) for party in self.distributions)

    @property
    def n_lambda(self) -> int:
        return self.weights.size


def build_from_lhv(model: LhvModel) -> MagicSquareTensor:
    """Tensor ``m = sum_lam k_lam prod_(p,m) P(outcome | p, m, lam)``."""
    acc = model.weights.copy()
    for party in model.distributions:
        for d in party:
            acc = acc[..., None] * d.reshape((d.shape[0],) + (1,) * (acc.ndim - 1) + (d.shape[1],))
    return MagicSquareTensor(acc.sum(axis=0), model.outcomes)


def _keep_map(outcomes, keep) -> dict[int, int]:
    if isinstance(keep, Mapping):
        km = {int(p): int(m) for p, m in keep.items()}
    else:
        km = {p: int(m) for p, m in enumerate(keep) if m is not None}
    for p, m in km.items():
        if not (0 <= p < len(outcomes)) or not (0 <= m < len(outcomes[p])):
            raise DimensionError(f"invalid selection (party {p}, measurement {m})")
    return dict(sorted(km.items()))


def marginal(tensor: MagicSquareTensor, keep) -> np.ndarray:
    """Joint distribution of the kept measurements (one per kept party).

    ``keep`` is either a sequence with one measurement index (or ``None``)
    per party, or a mapping ``{party: measurement}``.  The result has one
    axis per kept party, in party order.
    """
    km = _keep_map(tensor.outcomes, keep)
    axes = _axes(tensor.outcomes)
    kept = [axes[p, m] for p, m in km.items()]
    drop = tuple(a for a in range(tensor.values.ndim) if a not in kept)
    return tensor.values.sum(axis=drop)


def marginal_operator(outcomes, keep) -> np.ndarray:
    """0/1 matrix mapping the flattened tensor to the flattened marginal.

    Row ``r`` selects the cells whose kept outcomes equal the ``r``-th tuple
    in row-major order.  ``marginal_operator(o, k) @ t.values.ravel()`` equals
    ``marginal(t, k).ravel()``.
    """
    outcomes = _normalize_outcomes(outcomes)
    km = _keep_map(outcomes, keep)
    axes = _axes(outcomes)
    shape = tuple(n for party in outcomes for n in party)
    idx = np.indices(shape).reshape(len(shape), -1)
    kept_shape = [outcomes[p][m] for p, m in km.items()]
    rows = np.zeros(idx.shape[1], dtype=np.int64)
    for (p, m), n in zip(km.items(), kept_shape):
        rows = rows * n + idx[axes[p, m]]
    op = np.zeros((int(np.prod(kept_shape)), idx.shape[1]))
    op[rows, np.arange(idx.shape[1])] = 1.0
    return op


@dataclasses.dataclass(frozen=True)
class NodeSelection:
    """Disjoint sets of tensor cells summed with sign + and sign -."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        plus = np.asarray(self.plus, dtype=bool)
        minus = np.asarray(self.minus, dtype=bool)
        if plus.shape != minus.shape:
            raise DimensionError("plus and minus masks differ in shape")
        if np.any(plus & minus):
            raise ValidationError("plus and minus node sets overlap")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    def coefficients(self) -> np.ndarray:
        return self.plus.astype(float) - self.minus.astype(float)


def node_sum(tensor: MagicSquareTensor, selection: NodeSelection) -> float:
    """Sum over plus nodes minus sum over minus nodes."""
    if selection.plus.shape != tensor.shape:
        raise DimensionError(f"selection shape {selection.plus.shape} != tensor shape {tensor.shape}")
    v = tensor.values
    return float(v[selection.plus].sum() - v[selection.minus].sum())


def parity_coefficients(outcomes, choice) -> np.ndarray:
    """Product of +-1 labels of the chosen dichotomic measurements, per cell.

    ``choice`` maps party -> measurement (or one entry per party).  With
    1-based outcome indices this is the sign (-1)^(sum of indices + n),
    i.e. (-1)^(i+j) for two parties and (-1)^(i+j+k+1) for three.
    """
    outcomes = _normalize_outcomes(outcomes)
    km = _keep_map(outcomes, choice)
    axes = _axes(outcomes)
    shape = tuple(n for party in outcomes for n in party)
    coef = np.ones(shape)
    for p, m in km.items():
        if outcomes[p][m] != 2:
            raise DimensionError(f"measurement ({p}, {m}) is not dichotomic")
        view = [1] * len(shape)
        view[axes[p, m]] = 2
        coef = coef * DICHOTOMIC_LABELS.reshape(view)
    return coef


def parity_selection(outcomes, choice) -> NodeSelection:
    """Nodes with label product +1 (plus) and -1 (minus)."""
    coef = parity_coefficients(outcomes, choice)
    return NodeSelection(coef > 0, coef < 0)


def correlation(tensor: MagicSquareTensor, meas_a: int, meas_b: int) -> float:
    """E(x, y) for two parties as a signed node sum."""
    if tensor.parties != 2:
        raise DimensionError("correlation needs a bipartite tensor")
    return node_sum(tensor, parity_selection(tensor.outcomes, [meas_a, meas_b]))


def correlation_from_joint(joint) -> float:
    """E = P11 - P12 - P21 + P22 for a 2x2 joint distribution."""
    p = np.asarray(joint, dtype=float)
    if p.shape != (2, 2):
        raise DimensionError("correlation needs a 2x2 joint distribution")
    return float(p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1])


def chsh_coefficients(outcomes=((2, 2), (2, 2))) -> np.ndarray:
    """Cell coefficients c with S = sum(c * m) for E(x,y) - E(x,y') + E(x',y) + E(x',y')."""
    outcomes = _normalize_outcomes(outcomes)
    if outcomes != ((2, 2), (2, 2)):
        raise DimensionError("CHSH needs 2 parties x 2 measurements x 2 outcomes")
    return (parity_coefficients(outcomes, [0, 0]) - parity_coefficients(outcomes, [0, 1])
            + parity_coefficients(outcomes, [1, 0]) + parity_coefficients(outcomes, [1, 1]))


def chsh_value(tensor: MagicSquareTensor) -> float:
    if tensor.outcomes != ((2, 2), (2, 2)):
        raise DimensionError("CHSH needs 2 parties x 2 measurements x 2 outcomes")
    return (correlation(tensor, 0, 0) - correlation(tensor, 0, 1)
            + correlation(tensor, 1, 0) + correlation(tensor, 1, 1))


def _pattern_choice(pattern, parties):
    if isinstance(pattern, str):
        letters = {"X": 0, "Y": 1}
        try:
            choice = [letters[c] for c in pattern.upper()]
        except KeyError:
            raise ValueError(f"pattern letters must be X or Y, got {pattern!r}") from None
    else:
        choice = [int(c) for c in pattern]
    if len(choice) != parties:
        raise DimensionError(f"pattern has {len(choice)} entries for {parties} parties")
    return choice


def parity_expectation(tensor: MagicSquareTensor, pattern) -> float:
    """Expectation of a product of dichotomic observables, one per party.

    ``pattern`` is a string such as ``"XYY"`` (X = measurement 0, Y =
    measurement 1) or a sequence of measurement indices.
    """
    choice = _pattern_choice(pattern, tensor.parties)
    return node_sum(tensor, parity_selection(tensor.outcomes, choice))


def random_tensor(rng: np.random.Generator, outcomes, size: int | None = None):
    """Flat-Dirichlet sample(s) over all cells."""
    outcomes = _normalize_outcomes(outcomes)
    shape = tuple(n for party in outcomes for n in party)
    cells = int(np.prod(shape))
    if size is None:
        return MagicSquareTensor(rng.dirichlet(np.ones(cells)), outcomes)
    return rng.dirichlet(np.ones(cells), size=size).reshape((size,) + shape)


def random_lhv_model(rng: np.random.Generator, outcomes, n_lambda: int = 4,
                     deterministic: bool = False) -> LhvModel:
    """Random model; with ``deterministic`` every response is a point mass."""
    outcomes = _normalize_outcomes(outcomes)
    weights = rng.dirichlet(np.ones(n_lambda))
    dists = []
    for party in outcomes:
        row = []
        for n in party:
            if deterministic:
                d = np.eye(n)[rng.integers(0, n, size=n_lambda)]
            else:
                d = rng.dirichlet(np.ones(n), size=n_lambda)
            row.append(d)
        dists.append(tuple(row))
    return LhvModel(weights, tuple(dists))


def deterministic_tensor(outcomes, assignment) -> MagicSquareTensor:
    """Point mass at the cell given by ``assignment`` (flat outcome tuple)."""
    outcomes = _normalize_outcomes(outcomes)
    shape = tuple(n for party in outcomes for n in party)
    v = np.zeros(shape)
    v[tuple(assignment)] = 1.0
    return MagicSquareTensor(v, outcomes)


def all_cells(outcomes):
    """Iterate outcome tuples in row-major order."""
    outcomes = _normalize_outcomes(outcomes)
    return itertools.product(*[range(n) for party in outcomes for n in party])
