"""JSON and CSV serialization.

Complex matrices are stored row-major as nested lists of ``[re, im]``
pairs.  Outcome indices in CSV files are 1-based.
"""

from __future__ import annotations

import csv
import io as _io
import itertools
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .feasibility import FeasibilityOutcome, LinearFeasibilityProblem
from .magic_square import MagicSquareTensor
from .majorization import MajorizationBound
from .quantum import DensityMatrix, ProjectiveMeasurement

__all__ = [
    "complex_to_json",
    "complex_from_json",
    "state_to_dict",
    "state_from_dict",
    "measurement_to_dict",
    "measurement_from_dict",
    "tensor_to_dict",
    "tensor_from_dict",
    "problem_to_dict",
    "problem_from_dict",
    "outcome_to_dict",
    "dumps",
    "marginal_csv",
    "bound_csv",
    "report_csv",
    "rows_csv",
    "write_atomic",
]


def complex_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def complex_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValidationError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _expect(data, kind):
    if not isinstance(data, dict) or data.get("type") != kind:
        raise ValidationError(f"expected an object with type {kind!r}")


def state_to_dict(state: DensityMatrix) -> dict:
    return {"type": "density_matrix", "party_dims": list(state.party_dims),
            "matrix": complex_to_json(state.matrix)}


def state_from_dict(data) -> DensityMatrix:
    _expect(data, "density_matrix")
    return DensityMatrix(complex_from_json(data["matrix"]), data.get("party_dims"))


def measurement_to_dict(meas: ProjectiveMeasurement) -> dict:
    return {"type": "projective_measurement", "name": meas.name,
            "labels": meas.labels.tolist(), "vectors": complex_to_json(meas.vectors)}


def measurement_from_dict(data) -> ProjectiveMeasurement:
    _expect(data, "projective_measurement")
    return ProjectiveMeasurement(complex_from_json(data["vectors"]), data.get("labels"),
                                 data.get("name"))


def tensor_to_dict(tensor: MagicSquareTensor) -> dict:
    """Shape header plus flat row-major values."""
    return {"type": "magic_square_tensor", "outcomes": [list(p) for p in tensor.outcomes],
            "shape": list(tensor.shape), "values": tensor.values.ravel().tolist()}


def tensor_from_dict(data) -> MagicSquareTensor:
    _expect(data, "magic_square_tensor")
    t = MagicSquareTensor(data["values"], data["outcomes"])
    if "shape" in data and list(t.shape) != list(data["shape"]):
        raise ValidationError(f"shape header {data['shape']} disagrees with outcomes")
    return t


def problem_to_dict(problem: LinearFeasibilityProblem) -> dict:
    out = {"type": "linear_feasibility_problem", "a_eq": problem.a_eq.tolist(),
           "b_eq": problem.b_eq.tolist()}
    if problem.outcomes is not None:
        out["outcomes"] = [list(p) for p in problem.outcomes]
    if problem.labels is not None:
        out["labels"] = list(problem.labels)
    return out


def problem_from_dict(data) -> LinearFeasibilityProblem:
    _expect(data, "linear_feasibility_problem")
    outcomes = data.get("outcomes")
    labels = data.get("labels")
    return LinearFeasibilityProblem(data["a_eq"], data["b_eq"],
                                    None if outcomes is None else tuple(map(tuple, outcomes)),
                                    None if labels is None else tuple(labels))


def outcome_to_dict(outcome: FeasibilityOutcome) -> dict:
    out = {"type": "feasibility_outcome", "status": outcome.status,
           "residual": outcome.residual, "iterations": outcome.iterations}
    if outcome.certificate is not None:
        out["certificate"] = outcome.certificate.tolist()
    if outcome.tensor is not None:
        out["witness"] = tensor_to_dict(outcome.tensor)
    elif outcome.point is not None:
        out["witness"] = outcome.point.tolist()
    return out


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def rows_csv(header, rows, comments=()) -> str:
    """CSV text with optional leading ``# key: value`` comment lines."""
    buf = _io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def marginal_csv(marginal, comments=()) -> str:
    """One row per outcome tuple: ``o1, o2, ..., p`` (1-based outcomes)."""
    p = np.asarray(marginal, dtype=float)
    header = [f"o{i + 1}" for i in range(p.ndim)] + ["p"]
    rows = [[i + 1 for i in idx] + [p[idx]]
            for idx in itertools.product(*[range(n) for n in p.shape])]
    return rows_csv(header, rows, comments)


def bound_csv(bound: MajorizationBound, comments=()) -> str:
    rows = [(k, bound.s[k - 1], bound.partial_sums[k]) for k in range(1, bound.s.size + 1)]
    return rows_csv(["k", "s_k", "S_k"], rows, comments)


def report_csv(reports, comments=()) -> str:
    """Rows (direction, k, lhs_partial, bound_partial, slack) for one or more reports."""
    rows = [(r.direction,) + row for r in reports for row in r.rows()]
    return rows_csv(["direction", "k", "lhs_partial", "bound_partial", "slack"], rows, comments)


def write_atomic(path, text: str) -> Path:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
