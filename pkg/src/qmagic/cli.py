"""Command-line front end: ``qmagic <command> [--config FILE] [--out FILE] ...``.

Every command reads an optional JSON config (unknown keys are rejected),
produces one output document (CSV, or JSON for ``ghz`` and ``bell-test``)
and writes it atomically to ``--out`` or to stdout.  A relative ``--out``
is resolved against ``$QMAGIC_OUT_DIR`` when that is set.

Exit codes: 0 success, 1 solver failure, 2 config error, 3 pool too large,
4 non-monotone scan.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, families, feasibility, io, steering
from ._config import TOL, override
from .errors import NonMonotoneError, PoolTooLargeError, QmagicError, SolverError
from .kernels import BACKEND
from .magic_square import LhvModel, build_from_lhv, chsh_coefficients, marginal, random_lhv_model
from .majorization import compute_bound
from .quantum import DensityMatrix, ProjectiveMeasurement, product_expectation

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG, EXIT_POOL, EXIT_MONOTONE = 0, 1, 2, 3, 4
SQRT5 = np.sqrt(5.0)


class ConfigError(ValueError):
    """Malformed config or command-line input."""


# ---------------------------------------------------------------- config parsing

def _check_keys(cfg: dict, allowed, where="config"):
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def parse_state(spec) -> DensityMatrix:
    """``{"family": name, ...params}`` or a serialized density matrix."""
    if not isinstance(spec, dict):
        raise ConfigError("state must be an object")
    if spec.get("type") == "density_matrix":
        return io.state_from_dict(spec)
    params = dict(spec)
    name = params.pop("family", None)
    if name is None:
        raise ConfigError("state needs a 'family' or a serialized density matrix")
    try:
        return families.state_family(name, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for state family {name!r}: {exc}") from None


def parse_measurements(spec) -> list[ProjectiveMeasurement]:
    """A list of measurement specs, each expanding to one or more measurements.

    Accepted forms: ``{"pauli": "x"}``, ``{"bloch": [x, y, z]}``,
    ``{"mub": d}``, ``{"family": "planar" | "sphere", "n": n}``,
    ``{"family": "icosahedron"}``, ``{"observable": [[[re, im], ...], ...]}``
    and serialized projective measurements.
    """
    specs = spec if isinstance(spec, list) else [spec]
    out: list[ProjectiveMeasurement] = []
    for s in specs:
        if not isinstance(s, dict):
            raise ConfigError("measurement specs must be objects")
        if s.get("type") == "projective_measurement":
            out.append(io.measurement_from_dict(s))
        elif "pauli" in s:
            _check_keys(s, {"pauli"}, "measurement")
            out.append(families.pauli(s["pauli"]))
        elif "bloch" in s:
            _check_keys(s, {"bloch"}, "measurement")
            out.append(families.bloch_measurement(s["bloch"]))
        elif "mub" in s:
            _check_keys(s, {"mub"}, "measurement")
            out.extend(families.mub_family(int(s["mub"])))
        elif "observable" in s:
            _check_keys(s, {"observable"}, "measurement")
            out.append(ProjectiveMeasurement.from_observable(io.complex_from_json(s["observable"])))
        elif "family" in s:
            name = s["family"]
            if name == "icosahedron":
                _check_keys(s, {"family"}, "measurement")
                out.extend(steering.icosahedron_family())
            elif name in ("planar", "sphere"):
                _check_keys(s, {"family", "n"}, "measurement")
                ctor = steering.planar_family if name == "planar" else steering.sphere_family
                out.extend(ctor(int(s["n"])))
            else:
                raise ConfigError(f"unknown measurement family {name!r}")
        else:
            raise ConfigError(f"unrecognized measurement spec {sorted(s)}")
    if not out:
        raise ConfigError("no measurements given")
    return out


def _pairs(meas, pairing):
    if pairing == "same":
        return steering.same_pairs(meas)
    if pairing == "conjugate":
        return steering.conjugate_pairs(meas)
    raise ConfigError(f"pairing must be 'same' or 'conjugate', got {pairing!r}")


def _family(name):
    if name not in families.STATE_FAMILIES or name in ("singlet", "ghz"):
        raise ConfigError("scan family must be one of werner2, werner3, isotropic2, isotropic3")
    ctor = families.STATE_FAMILIES[name]
    return lambda eta: ctor(eta)


# ---------------------------------------------------------------- commands
# each returns (document text, human summary lines)

def cmd_chsh(cfg, args, header):
    _check_keys(cfg, {"mode", "state", "angles", "n_lambda", "model"})
    mode = cfg.get("mode", "quantum")
    if mode == "random-tensor":
        rng = np.random.default_rng(args.seed)
        n = args.samples
        coef = chsh_coefficients().ravel()
        s = rng.dirichlet(np.ones(16), size=n) @ coef
        doc = io.rows_csv(["seed", "sample", "S"], ((args.seed, i, v) for i, v in enumerate(s)), header)
        return doc, [f"samples: {n}", f"max |S|: {np.abs(s).max():.15g}"]
    if mode == "lhv":
        kind = cfg.get("model", "all-plus")
        if kind == "all-plus":
            point = (np.array([[1.0, 0.0]]),) * 2
            model = LhvModel(np.ones(1), (point, point))
        elif kind == "random":
            rng = np.random.default_rng(args.seed)
            model = random_lhv_model(rng, ((2, 2), (2, 2)), int(cfg.get("n_lambda", 4)))
        else:
            raise ConfigError(f"lhv model must be all-plus or random, got {kind!r}")
        tensor = build_from_lhv(model)
        joints = np.array([[marginal(tensor, [x, y]) for y in range(2)] for x in range(2)])
    elif mode == "quantum":
        state = parse_state(cfg.get("state", {"family": "singlet"}))
        joints = feasibility.chsh_joints(state, cfg.get("angles", feasibility.CHSH_OPTIMAL_ANGLES))
    else:
        raise ConfigError(f"mode must be quantum, lhv or random-tensor, got {mode!r}")
    e = joints[..., 0, 0] - joints[..., 0, 1] - joints[..., 1, 0] + joints[..., 1, 1]
    s = feasibility.chsh_from_joints(joints)
    outcome = feasibility.bell_locality_decide(joints)
    rows = [("E(x,y)", e[0, 0]), ("E(x,y')", e[0, 1]), ("E(x',y)", e[1, 0]),
            ("E(x',y')", e[1, 1]), ("S", s), ("status", outcome.status)]
    return io.rows_csv(["quantity", "value"], rows, header), [f"S = {s:.15g}", f"status: {outcome.status.upper()}"]


def cmd_ghz(cfg, args, header):
    _check_keys(cfg, set())
    full_prob = feasibility.ghz_problem()
    full = feasibility.solve_feasibility(full_prob)
    relaxed = feasibility.ghz_relaxed_check()
    lo, hi = feasibility.ghz_xxx_range()
    state = families.ghz()
    x, y = families.pauli("x"), families.pauli("y")
    quantum = {p: product_expectation(state, [x if c == "X" else y for c in p])
               for p in ("XYY", "YXY", "YYX", "XXX")}
    doc = {"meta": header, "full_system": {"problem": io.problem_to_dict(full_prob),
                                           "outcome": io.outcome_to_dict(full)},
           "relaxed_system": {"status": relaxed.status, "xxx_min": lo, "xxx_max": hi},
           "quantum_expectations": quantum}
    summary = [f"four constraints: {full.status.upper()} (certificate y.b = {full.residual:.6g})",
               f"three constraints: {relaxed.status.upper()}, forced <XXX> in [{lo:.12g}, {hi:.12g}]",
               "GHZ state: " + ", ".join(f"<{k}> = {v:+.12g}" for k, v in quantum.items())]
    return io.dumps(doc), summary


def cmd_bell_test(cfg, args, header):
    _check_keys(cfg, {"joints", "state", "angles", "visibility"})
    if "joints" in cfg:
        joints = np.asarray(cfg["joints"], dtype=float)
    else:
        state = parse_state(cfg.get("state", {"family": "singlet"}))
        joints = feasibility.chsh_joints(state, cfg.get("angles", feasibility.CHSH_OPTIMAL_ANGLES))
    if "visibility" in cfg:
        joints = feasibility.mix_with_noise(joints, float(cfg["visibility"]))
    outcome = feasibility.bell_locality_decide(joints)
    doc = {"meta": header, "problem": io.problem_to_dict(feasibility.bell_locality_problem(joints)),
           "outcome": io.outcome_to_dict(outcome)}
    return io.dumps(doc), [f"status: {outcome.status.upper()}"]


def cmd_bound(cfg, args, header):
    _check_keys(cfg, {"observables", "method", "max_pool"})
    if "observables" not in cfg:
        raise ConfigError("bound needs 'observables'")
    obs = parse_measurements(cfg["observables"])
    bound = compute_bound(obs, method=cfg.get("method", "auto"), max_pool=int(cfg.get("max_pool", 12)))
    return io.bound_csv(bound, header + [f"method: {bound.method}", f"exact: {bound.exact}"]), [
        f"s = {np.array2string(bound.s, precision=10)}"]


def cmd_steer(cfg, args, header):
    _check_keys(cfg, {"state", "measurements", "pairing", "direction"})
    state = parse_state(cfg.get("state", {"family": "werner2", "eta": 0.8}))
    meas = parse_measurements(cfg.get("measurements", [{"pauli": "x"}, {"pauli": "y"}]))
    pairs = _pairs(meas, cfg.get("pairing", "same"))
    direction = cfg.get("direction", "A->B")
    if direction == "both":
        reports = list(steering.two_way_check(state, pairs))
    else:
        if direction not in steering.DIRECTIONS:
            raise ConfigError(f"direction must be A->B, B->A or both, got {direction!r}")
        reports = [steering.steering_check(steering.SteeringScenario(state, pairs, direction))]
    summary = [f"{r.direction}: {'holds' if r.holds else 'VIOLATED (steering certified)'}, "
               f"worst k = {r.worst_k}, violation = {r.violation:.12g}" for r in reports]
    return io.report_csv(reports, header), summary


def cmd_scan(cfg, args, header):
    _check_keys(cfg, {"family", "measurements", "pairing", "direction", "measurement_family", "n_values"})
    fam = _family(cfg.get("family", "werner2"))
    pairing = cfg.get("pairing", "same")
    direction = cfg.get("direction", "A->B")
    if "n_values" in cfg:
        name = cfg.get("measurement_family", "planar")
        if name not in ("planar", "sphere"):
            raise ConfigError("measurement_family must be planar or sphere")
        ns = [int(n) for n in cfg["n_values"]]
        ths = [steering.threshold_scan(fam, _pairs(parse_measurements({"family": name, "n": n}), pairing),
                                       direction, tol=args.tol) for n in ns]
        limit = steering.extrapolate_limit(ths)
        doc = io.rows_csv(["n", "threshold"], zip(ns, ths), header + [f"extrapolated_limit: {limit!r}"])
        return doc, [f"n = {n}: eta* = {t:.10f}" for n, t in zip(ns, ths)] + [f"extrapolated: {limit:.10f}"]
    meas = parse_measurements(cfg.get("measurements", [{"pauli": "x"}, {"pauli": "y"}]))
    th = steering.threshold_scan(fam, _pairs(meas, pairing), direction, tol=args.tol)
    return io.rows_csv(["measurements", "threshold"], [(len(meas), th)], header), [f"eta* = {th:.10f}"]


TABLE1_VALUES = {
    ("werner", "N=2", "2D"): 2 / np.pi,
    ("isotropic", "N=2", "2D"): 2 / np.pi,
    ("werner", "N=2", "3D"): 0.5,
    ("isotropic", "N=2", "3D"): 0.5,
    ("werner", "N=3", "MUB"): 1.0,
    ("isotropic", "N=3", "MUB"): (3 * SQRT5 + 1) / 16,
}


def table1_rows(planar_n=10_000, sphere_ns=(100, 1000, 10_000), tol=None):
    """(state, N, measurements, threshold, reference, abs_error) per Table-1 cell."""
    rows = []
    for state, fam2, fam3, pairing in (("werner", families.werner_qubit, families.werner_qutrit, "same"),
                                        ("isotropic", families.isotropic_qubit, families.isotropic_qutrit,
                                         "conjugate")):
        th2d = steering.threshold_scan(fam2, _pairs(steering.planar_family(planar_n), pairing), tol=tol)
        sph = [steering.threshold_scan(fam2, _pairs(steering.sphere_family(n), pairing), tol=tol)
               for n in sphere_ns]
        th3d = steering.extrapolate_limit(sph)
        th3 = steering.threshold_scan(fam3, _pairs(families.mub_family(3), pairing), tol=tol)
        for key, val in ((("N=2", "2D"), th2d), (("N=2", "3D"), th3d), (("N=3", "MUB"), th3)):
            ref = TABLE1_VALUES[(state,) + key]
            rows.append((state,) + key + (val, ref, abs(val - ref)))
    return rows


def cmd_table1(cfg, args, header):
    _check_keys(cfg, {"planar_n", "sphere_ns"})
    rows = table1_rows(int(cfg.get("planar_n", 10_000)),
                       tuple(int(n) for n in cfg.get("sphere_ns", (100, 1000, 10_000))), args.tol)
    doc = io.rows_csv(["state", "N", "measurements", "threshold", "reference", "abs_error"], rows, header)
    return doc, [f"{r[0]:9s} {r[1]} {r[2]:3s}: {r[3]:.8f} (ref {r[4]:.8f}, err {r[5]:.2e})" for r in rows]


COMMANDS = {
    "chsh": cmd_chsh,
    "ghz": cmd_ghz,
    "bell-test": cmd_bell_test,
    "bound": cmd_bound,
    "steer": cmd_steer,
    "scan": cmd_scan,
    "table1": cmd_table1,
}


# ---------------------------------------------------------------- entry point

def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("samples must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmagic", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qmagic {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--seed", type=_u64, default=0, help="RNG seed (unsigned 64-bit)")
    p.add_argument("--tol", type=_positive_float, default=None, help="bisection tolerance for scans")
    p.add_argument("--samples", type=_positive_int, default=1000, help="sample count for random modes")
    return p


def _load_config(path):
    if path is None:
        return {}, {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    tols = cfg.pop("tolerances", {})
    _check_keys(tols, {f.name for f in dataclasses.fields(TOL)}, "tolerances")
    return cfg, tols


def _resolve_out(path: Path) -> Path:
    base = os.environ.get("QMAGIC_OUT_DIR")
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, tols = _load_config(args.config)
        with override(**tols):
            if args.tol is not None:
                TOL.bisection = args.tol
            header = [f"qmagic {__version__}", f"command: {args.command}", f"seed: {args.seed}",
                      f"backend: {BACKEND}",
                      "tolerances: " + ", ".join(f"{k}={v!r}" for k, v in dataclasses.asdict(TOL).items())]
            doc, summary = COMMANDS[args.command](cfg, args, header)
    except ConfigError as exc:
        print(f"qmagic: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PoolTooLargeError as exc:
        print(f"qmagic: {exc}", file=sys.stderr)
        return EXIT_POOL
    except NonMonotoneError as exc:
        print(f"qmagic: {exc}", file=sys.stderr)
        return EXIT_MONOTONE
    except SolverError as exc:
        print(f"qmagic: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (QmagicError, ValueError, KeyError, TypeError) as exc:
        print(f"qmagic: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out is None:
        sys.stdout.write(doc)
    else:
        out = io.write_atomic(_resolve_out(args.out), doc)
        for line in summary:
            print(line)
        print(f"wrote {out}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
