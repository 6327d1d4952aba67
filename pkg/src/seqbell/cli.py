"""Command-line surface: scenario evaluation, frontier sweeps, threshold
tables, Monte Carlo bound verification, the biased-selection window, and the
channel-equivalence oracle check.

Every numeric output is printed with 17 significant digits so files round-trip
losslessly, and every file-writing command drops a RunManifest next to its
outputs.  Timestamps live only in the manifest, so rerunning a command with
the same seed reproduces byte-identical CSV/JSON bodies.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bounds import biased_cross_limit, biased_s11, biased_s22, thresholds
from .metrics import Scenario, horodecki_value, monogamy_region, proxy_report
from .observables import Observable, make_observable
from .states import (
    MeasurementPolicy,
    TwoQubitState,
    apply_measurement_first,
    apply_measurement_second,
    channel_oracle,
    from_density_matrix,
    is_physical,
    post_measurement_state,
    pure_state,
    to_density_matrix,
)
from .search import DEConfig, PARAM_NAMES, monte_carlo_bounds, sweep_frontier

WORKERS_ENV = "SEQBELL_WORKERS"

_CSV_HEADER = "s,best_objective,feasible,generations,alpha," + ",".join(PARAM_NAMES[:16])


class ConfigError(ValueError):
    """Input file or flag violates the schema; message carries the field path."""


# ---------------------------------------------------------------------------
# 17-significant-digit serialization


def _fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value in output")
    return format(x, ".17g")


def _json_body(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f"{inner}{json.dumps(str(k))}: {_json_body(v, indent + 1)}" for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        seq = list(obj)
        if not seq:
            return "[]"
        items = ",\n".join(f"{inner}{_json_body(v, indent + 1)}" for v in seq)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if bool(obj) else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _json_dumps(obj) -> str:
    return _json_body(obj) + "\n"


def _write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_manifest(
    out_path: str, command: str, inputs: dict, seed: int | None, worker_count: int | None, outputs
) -> None:
    """config_hash covers every input that determines the output bytes;
    worker_count is recorded but excluded since results are worker-invariant."""
    canonical = json.dumps(inputs, sort_keys=True, separators=(",", ":"))
    stem = out_path[: -len(".csv")] if out_path.endswith(".csv") else out_path
    stem = stem[: -len(".json")] if stem.endswith(".json") else stem
    manifest = {
        "command": command,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "seed": seed,
        "worker_count": worker_count,
        "artifact_version": __version__,
        "started": _write_manifest.started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    _write_text(stem + ".manifest.json", _json_dumps(manifest))


_write_manifest.started = ""


def _mark_started() -> None:
    _write_manifest.started = datetime.now(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# scenario file schema


def _need(node: dict, key: str, path: str):
    if key not in node:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return node[key]


def _as_mapping(node, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected an object, got {type(node).__name__}")
    return node


def _as_number(node, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {node!r}")
    return float(node)


def _as_vector(node, path: str, length: int) -> list[float]:
    if not isinstance(node, list) or len(node) != length:
        raise ConfigError(f"{path}: expected a list of {length} numbers")
    return [_as_number(v, f"{path}[{i}]") for i, v in enumerate(node)]


def _load_observable(node, path: str) -> Observable:
    m = _as_mapping(node, path)
    for key in m:
        if key not in ("bias", "strength", "direction"):
            raise ConfigError(f"{path}: unknown key {key!r}")
    bias = _as_number(_need(m, "bias", path), f"{path}.bias")
    strength = _as_number(_need(m, "strength", path), f"{path}.strength")
    direction = _as_vector(_need(m, "direction", path), f"{path}.direction", 3)
    if float(np.linalg.norm(direction)) < 1e-12:
        raise ConfigError(f"{path}.direction: zero direction")
    try:
        return make_observable(bias, strength, direction)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _load_policy(node, path: str) -> MeasurementPolicy:
    m = _as_mapping(node, path)
    for key in m:
        if key not in ("primary", "secondary", "epsilon"):
            raise ConfigError(f"{path}: unknown key {key!r}")
    primary = _load_observable(_need(m, "primary", path), f"{path}.primary")
    secondary = _load_observable(_need(m, "secondary", path), f"{path}.secondary")
    eps = _as_number(m.get("epsilon", 0.5), f"{path}.epsilon")
    try:
        return MeasurementPolicy(primary, secondary, eps)
    except ValueError as exc:
        raise ConfigError(f"{path}.epsilon: {exc}") from exc


def _load_state(node, path: str) -> TwoQubitState:
    m = _as_mapping(node, path)
    if "alpha" in m:
        for key in m:
            if key != "alpha":
                raise ConfigError(f"{path}: key {key!r} not allowed alongside 'alpha'")
        try:
            return pure_state(_as_number(m["alpha"], f"{path}.alpha"))
        except ValueError as exc:
            raise ConfigError(f"{path}.alpha: {exc}") from exc
    for key in m:
        if key not in ("a", "b", "T"):
            raise ConfigError(f"{path}: unknown key {key!r}")
    a = _as_vector(_need(m, "a", path), f"{path}.a", 3)
    b = _as_vector(_need(m, "b", path), f"{path}.b", 3)
    t_rows = _need(m, "T", path)
    if not isinstance(t_rows, list) or len(t_rows) != 3:
        raise ConfigError(f"{path}.T: expected a 3x3 matrix as a list of 3 rows")
    t = [_as_vector(row, f"{path}.T[{i}]", 3) for i, row in enumerate(t_rows)]
    try:
        return TwoQubitState(np.array(a), np.array(b), np.array(t))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _load_scenario(node) -> Scenario:
    m = _as_mapping(node, "scenario")
    for key in m:
        if key not in ("state", "policy_a", "policy_b"):
            raise ConfigError(f"scenario: unknown key {key!r}")
    return Scenario(
        _load_state(_need(m, "state", "scenario"), "state"),
        _load_policy(_need(m, "policy_a", "scenario"), "policy_a"),
        _load_policy(_need(m, "policy_b", "scenario"), "policy_b"),
    )


def _read_json_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# commands


def _cmd_eval(args) -> int:
    raw = _read_json_file(args.config)
    scenario = _load_scenario(raw)
    if not is_physical(scenario.initial_state):
        eig_min = float(np.linalg.eigvalsh(to_density_matrix(scenario.initial_state)).min())
        raise ConfigError(f"state: unphysical state, min density-matrix eigenvalue {_fmt(eig_min)}")
    for side, policy in (("policy_a", scenario.policy_a), ("policy_b", scenario.policy_b)):
        if abs(policy.secondary_prob - 0.5) > 1e-12:
            print(
                f"warning: {side}.epsilon = {_fmt(policy.secondary_prob)}; "
                "monogamy region classification assumes epsilon = 1/2",
                file=sys.stderr,
            )
    report = proxy_report(scenario)
    downstream = post_measurement_state(
        scenario.initial_state, scenario.policy_a, scenario.policy_b
    )
    s22_check = horodecki_value(downstream.corr)
    if abs(s22_check - report.s22) > 1e-12:
        raise RuntimeError(
            f"s22 cross-check failed: proxy formula {report.s22!r} vs "
            f"post-measurement route {s22_check!r}"
        )
    body = dict(report.as_dict())
    body["s22_cross_check"] = s22_check
    body["monogamy_region_s11_s22"] = monogamy_region(report.s11, report.s22)
    body["monogamy_region_s12_s21"] = monogamy_region(report.s12, report.s21)
    sys.stdout.write(_json_dumps(body))
    return 0


def _cmd_thresholds(args) -> int:
    table = thresholds()
    fields = [
        ("s_min", table.s_min),
        ("s_max", table.s_max),
        ("r_minus_0", table.r_minus_0),
        ("r_plus", table.r_plus),
        ("eps_max", table.eps_max),
        ("eps_limit", table.eps_limit),
        ("r_0", table.r_0),
        ("s_0", table.s_0),
        ("improved_bound", table.improved_bound),
    ]
    if args.json_output:
        sys.stdout.write(_json_dumps(dict(fields)))
    else:
        for name, value in fields:
            print(f"{name:<16}{_fmt(value)}")
    return 0


def _sweep_config(args) -> tuple[DEConfig, list[float]]:
    file_cfg = _read_json_file(args.config) if args.config else {}
    if not isinstance(file_cfg, dict):
        raise ConfigError(f"{args.config}: expected an object")
    known = {
        "population_size",
        "max_generations",
        "recombination",
        "mutation_range",
        "tolerance",
        "s_values",
    }
    for key in file_cfg:
        if key not in known:
            raise ConfigError(f"{args.config}: unknown key {key!r}")
    grid: list[float] = []
    if args.grid:
        grid = [float(tok) for tok in args.grid.split(",") if tok.strip()]
    elif "s_values" in file_cfg:
        grid = [_as_number(v, f"s_values[{i}]") for i, v in enumerate(file_cfg["s_values"])]
    if not grid:
        raise ConfigError("sweep: provide --grid or an 's_values' list in --config")
    kwargs = {
        "population_size": args.population or file_cfg.get("population_size", 100),
        "max_generations": args.generations or file_cfg.get("max_generations", 200),
        "seed": args.seed,
        "worker_count": args.workers,
    }
    if "recombination" in file_cfg:
        kwargs["recombination"] = float(file_cfg["recombination"])
    if "mutation_range" in file_cfg:
        lo, hi = file_cfg["mutation_range"]
        kwargs["mutation_range"] = (float(lo), float(hi))
    if "tolerance" in file_cfg:
        kwargs["tolerance"] = float(file_cfg["tolerance"])
    try:
        return DEConfig(**kwargs), grid
    except ValueError as exc:
        raise ConfigError(f"sweep config: {exc}") from exc


def _cmd_sweep(args) -> int:
    config, grid = _sweep_config(args)
    result = sweep_frontier(args.problem, grid, config)

    lines = [_CSV_HEADER]
    for pt in result.points:
        vec = pt.best_vector
        cells = [
            _fmt(pt.s),
            _fmt(pt.best_objective),
            "1" if pt.feasible else "0",
            str(pt.generations_used),
            _fmt(vec[16]),
        ]
        cells.extend(_fmt(v) for v in vec[:16])
        lines.append(",".join(cells))
    csv_text = "\n".join(lines) + "\n"

    violations = [
        pt.s
        for pt in result.points
        if pt.feasible and pt.s >= 2.0 and pt.best_objective > 2.0 + args.tolerance
    ]
    sidecar = {
        "problem": result.problem,
        "conjecture_tolerance": args.tolerance,
        "config": {
            "population_size": config.population_size,
            "max_generations": config.max_generations,
            "recombination": config.recombination,
            "mutation_range": list(config.mutation_range),
            "tolerance": config.tolerance,
            "seed": config.seed,
        },
        "points": [
            {
                "s": pt.s,
                "best_objective": pt.best_objective,
                "feasible": pt.feasible,
                "converged": pt.converged,
                "generations_used": pt.generations_used,
                "best_vector": list(pt.best_vector),
            }
            for pt in result.points
        ],
        "monotone_flags": list(result.monotone_flags),
        "violations": violations,
    }

    out_csv = args.out
    out_json = (out_csv[:-4] if out_csv.endswith(".csv") else out_csv) + ".json"
    _write_text(out_csv, csv_text)
    _write_text(out_json, _json_dumps(sidecar))
    inputs = {
        "command": "sweep",
        "problem": args.problem,
        "s_values": grid,
        "config": sidecar["config"],
        "conjecture_tolerance": args.tolerance,
    }
    _write_manifest(out_csv, "sweep", inputs, config.seed, config.worker_count, [out_csv, out_json])

    for pt in result.points:
        status = "feasible" if pt.feasible else "infeasible"
        conv = "converged" if pt.converged else "generations exhausted"
        print(
            f"s={_fmt(pt.s)} best={_fmt(pt.best_objective)} {status} "
            f"({conv} after {pt.generations_used})"
        )
    for s in result.monotone_flags:
        print(f"warning: frontier not monotone at s={_fmt(s)}; earlier point under-converged")
    if violations:
        print(
            "conjecture violated at s = "
            + ", ".join(_fmt(s) for s in violations)
            + f" (best objective exceeds 2 + {_fmt(args.tolerance)})"
        )
        return 1
    return 0


def _cmd_verify_bounds(args) -> int:
    summary = monte_carlo_bounds(args.n, args.mode, args.seed, worker_count=args.workers)
    body = {
        "mode": summary.mode,
        "n": summary.n,
        "seed": summary.seed,
        "max_s11_plus_s22": summary.max_s11_plus_s22,
        "argmax_s11_plus_s22": list(summary.argmax_s11_plus_s22),
        "max_s12sq_plus_s21sq": summary.max_s12sq_plus_s21sq,
        "argmax_s12sq_plus_s21sq": list(summary.argmax_s12sq_plus_s21sq),
        "worst_eq14_residual": summary.worst_eq14_residual,
        "worst_eq13_residual": summary.worst_eq13_residual,
    }
    text = _json_dumps(body)
    sys.stdout.write(text)
    if args.out:
        _write_text(args.out, text)
        inputs = {"command": "verify-bounds", "mode": args.mode, "n": args.n, "seed": args.seed}
        _write_manifest(args.out, "verify-bounds", inputs, args.seed, args.workers, [args.out])
    if args.mode == "eq13_hypotheses" and summary.max_s12sq_plus_s21sq > 8.0 + 1e-9:
        print("bound violated: s12^2 + s21^2 exceeded 8 + 1e-9", file=sys.stderr)
        return 1
    if args.mode == "unbiased_singlet" and summary.max_s11_plus_s22 > 4.0 + 1e-9:
        print("bound violated: |s11| + s22 exceeded 4 + 1e-9", file=sys.stderr)
        return 1
    return 0


def _bisect(fn, lo: float, hi: float) -> float:
    """Root of fn on [lo, hi] assuming one sign change; interval to 1e-12."""
    f_lo = fn(lo)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if (fn(mid) > 0.0) == (f_lo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _cmd_biased_window(args) -> int:
    eps = args.epsilon
    if not 0.0 <= eps < 1.0:
        raise ConfigError(f"--epsilon: must lie in [0, 1), got {eps}")
    if args.grid:
        grid = [float(tok) for tok in args.grid.split(",") if tok.strip()]
    else:
        grid = [round(0.60 + 0.02 * k, 2) for k in range(11)]
    rows = []
    for s in grid:
        if not 0.0 <= s <= 1.0:
            raise ConfigError(f"--grid: strength must lie in [0, 1], got {s}")
        r = math.sqrt(max(1.0 - s * s, 0.0))
        early = biased_s11(s)
        late = biased_s22(r, eps)
        cross = biased_cross_limit(s, r)
        rows.append(
            {
                "strength": s,
                "s11": early,
                "s22": late,
                "cross": cross,
                "all_exceed": early > 2.0 and late > 2.0 and cross > 2.0,
            }
        )

    # lower endpoint: biased_s11 crosses 2 from below as the strength grows
    lower = _bisect(lambda s: biased_s11(s) - 2.0, 0.0, 1.0)
    # upper endpoint: the late-pair value crosses 2 from above
    late_at = lambda s: biased_s22(math.sqrt(max(1.0 - s * s, 0.0)), eps) - 2.0
    upper = _bisect(late_at, 0.0, 1.0) if late_at(0.0) > 0.0 else None
    empty = upper is None or upper <= lower
    body = {
        "epsilon": eps,
        "rows": rows,
        "window_lower": lower,
        "window_upper": upper,
        "window_empty": empty,
    }
    if args.json_output:
        sys.stdout.write(_json_dumps(body))
        return 0
    print(f"epsilon = {_fmt(eps)}")
    print(f"{'strength':<24}{'s11':<24}{'s22':<24}{'cross':<24}all>2")
    for row in rows:
        flag = "yes" if row["all_exceed"] else "no"
        print(
            f"{_fmt(row['strength']):<24}{_fmt(row['s11']):<24}"
            f"{_fmt(row['s22']):<24}{_fmt(row['cross']):<24}{flag}"
        )
    if empty:
        upper_txt = "none" if upper is None else _fmt(upper)
        print(f"window: empty (lower endpoint {_fmt(lower)}, upper endpoint {upper_txt})")
    else:
        print(f"window: ({_fmt(lower)}, {_fmt(upper)})")
    return 0


def _cmd_oracle_check(args) -> int:
    if args.n < 1:
        raise ConfigError(f"--n: must be at least 1, got {args.n}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed, spawn_key=(7,))))
    worst = 0.0
    for i in range(args.n):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho).real
        strength = rng.uniform(0.0, 1.0)
        bias = rng.uniform(-1.0, 1.0) * (1.0 - strength)
        obs = make_observable(bias, strength, rng.normal(size=3))
        side = "first" if i % 2 == 0 else "second"
        via_channel = from_density_matrix(channel_oracle(rho, obs, side))
        state = from_density_matrix(rho)
        if side == "first":
            via_map = apply_measurement_first(state, obs)
        else:
            via_map = apply_measurement_second(state, obs)
        dev = max(
            float(np.max(np.abs(via_channel.bloch_a - via_map.bloch_a))),
            float(np.max(np.abs(via_channel.bloch_b - via_map.bloch_b))),
            float(np.max(np.abs(via_channel.corr - via_map.corr))),
        )
        worst = max(worst, dev)
    print(f"checked {args.n} random (state, observable, side) cases")
    print(f"max deviation between density-matrix and Bloch routes: {_fmt(worst)}")
    if worst >= 1e-10:
        print("oracle check failed: deviation at or above 1e-10", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"{WORKERS_ENV}: must be at least 1, got {value}")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqbell",
        description="Sequential CHSH nonlocality sharing: evaluation, frontiers, and bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a scenario file and print its proxy report")
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="constrained-frontier sweep over constraint levels")
    p.add_argument("--problem", required=True, choices=("passon", "crossed"))
    p.add_argument("--grid", help="comma-separated constraint levels")
    p.add_argument("--config", help="JSON file with solver settings and/or s_values")
    p.add_argument("--out", default="sweep.csv", help="output CSV path (JSON sidecar alongside)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--generations", type=int, default=None)
    p.add_argument(
        "--tolerance",
        type=float,
        default=1e-3,
        help="conjecture tolerance: exit nonzero if a feasible s >= 2 point exceeds 2 + tol",
    )
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("thresholds", help="print the biased-selection threshold constants")
    p.add_argument("--json", dest="json_output", action="store_true")
    p.set_defaults(func=_cmd_thresholds)

    p = sub.add_parser("verify-bounds", help="Monte Carlo stress test of the monogamy bounds")
    p.add_argument("mode", choices=("unbiased_singlet", "eq13_hypotheses", "free"))
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", help="also write the summary JSON here")
    p.set_defaults(func=_cmd_verify_bounds)

    p = sub.add_parser("biased-window", help="strength window where all four pairs violate CHSH")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--grid", help="comma-separated strengths to tabulate")
    p.add_argument("--json", dest="json_output", action="store_true")
    p.set_defaults(func=_cmd_biased_window)

    p = sub.add_parser("oracle-check", help="density-matrix vs Bloch-map equivalence on random cases")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    _mark_started()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "workers", None) is None and hasattr(args, "workers"):
            args.workers = _default_workers()
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
