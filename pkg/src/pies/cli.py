"""Command-line interface.

Subcommands: generate, solve, compare, sweep, ann-demo, fixture. All of
them exit 0 on success and nonzero with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .ann import AnnGenParams, ann_scenario
from .generator import REAL_WORLD_MODELS, ExpParamMode, GenParams, generate
from .harness import (
    ALGORITHM_ORDER,
    fixture_comparison,
    run_comparison,
    sweep,
    write_trials_csv,
)
from .model import validate
from .placement import DEFAULT_EXACT_CAP, Algorithm, solve
from .scenario_io import load, save


def _parse_algorithms(text: str) -> list[Algorithm]:
    names = [part.strip().lower() for part in text.split(",") if part.strip()]
    if not names:
        raise ValueError("empty algorithm list")
    try:
        return [Algorithm(name) for name in names]
    except ValueError:
        valid = ",".join(a.value for a in ALGORITHM_ORDER)
        raise ValueError(f"unknown algorithm in '{text}' (valid: {valid})") from None


def _parse_counts(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def _gen_params(args: argparse.Namespace) -> GenParams:
    """Build GenParams from an optional JSON file plus CLI overrides."""
    fields: dict = {}
    if args.params:
        fields.update(json.loads(Path(args.params).read_text()))
    overrides = {
        "num_users": args.num_users,
        "num_edges": args.num_edges,
        "num_services": args.num_services,
        "delay_max": args.delay_max,
    }
    for key, value in overrides.items():
        if value is not None:
            fields[key] = value
    if args.exp_param_mode is not None:
        fields["exp_param_mode"] = args.exp_param_mode
    if "exp_param_mode" in fields and isinstance(fields["exp_param_mode"], str):
        fields["exp_param_mode"] = ExpParamMode(fields["exp_param_mode"])
    for key in list(fields):
        if key.endswith("_range"):
            fields[key] = tuple(fields[key])
    if "num_users" not in fields:
        raise ValueError("num_users is required (flag --num-users or params file)")
    return GenParams(**fields)


def _out_stream(path: str | None):
    return open(path, "w", newline="") if path else sys.stdout


def _add_common_gen_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--params", help="JSON file with generation parameters")
    parser.add_argument("--num-users", type=int)
    parser.add_argument("--num-edges", type=int)
    parser.add_argument("--num-services", type=int)
    parser.add_argument("--delay-max", type=float)
    parser.add_argument(
        "--exp-param-mode",
        choices=[m.value for m in ExpParamMode],
        help="interpret exponential parameters as rate or scale",
    )


def cmd_generate(args: argparse.Namespace) -> int:
    params = _gen_params(args)
    scenario = generate(params, args.seed)
    save(scenario, args.out)
    print(f"wrote {args.out}: E={params.num_edges} S={params.num_services} "
          f"U={params.num_users} seed={args.seed}")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    scenario = load(args.scenario)
    (algorithm,) = _parse_algorithms(args.algorithm)
    report = solve(scenario, algorithm, seed=args.seed, exact_cap=args.exact_cap)
    problems = validate(scenario, report.placement, report.schedule)
    if problems:  # defensive; solvers must emit feasible pairs
        raise RuntimeError(f"solver produced infeasible output: {problems}")
    doc = {
        "algorithm": report.algorithm.value,
        "objective": report.objective,
        "num_placed": report.placed_count,
        "num_scheduled": report.scheduled_count,
        "runtime_sec": report.runtime,
        "placement": sorted(report.placement.placed),
        "schedule": {str(u): m for u, m in sorted(report.schedule.assigned.items())},
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    scenario = load(args.scenario)
    algorithms = _parse_algorithms(args.algorithms)
    records = run_comparison(
        scenario, algorithms, seed=args.seed, exact_cap=args.exact_cap
    )
    stream = _out_stream(args.out)
    try:
        write_trials_csv(records, stream, aggregates=False)
    finally:
        if args.out:
            stream.close()
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    args.num_users = 0  # placeholder; the sweep sets the count per point
    params = _gen_params(args)
    algorithms = _parse_algorithms(args.algorithms)
    counts = _parse_counts(args.user_counts)
    records = sweep(
        params,
        counts,
        args.trials,
        algorithms,
        base_seed=args.seed,
        exact_cap=args.exact_cap,
    )
    stream = _out_stream(args.out)
    try:
        write_trials_csv(records, stream)
    finally:
        if args.out:
            stream.close()
    return 0


def cmd_ann_demo(args: argparse.Namespace) -> int:
    params = AnnGenParams(
        num_users=args.num_users,
        num_edges=args.num_edges if args.num_edges is not None else 3,
        num_services=args.num_services if args.num_services is not None else 5,
    )
    scenario = ann_scenario(params, args.seed)
    algorithms = _parse_algorithms(args.algorithms)
    records = run_comparison(
        scenario, algorithms, seed=args.seed, exact_cap=args.exact_cap
    )
    stream = _out_stream(args.out)
    try:
        write_trials_csv(records, stream, aggregates=False)
    finally:
        if args.out:
            stream.close()
    return 0


def cmd_fixture(args: argparse.Namespace) -> int:
    algorithms = _parse_algorithms(args.algorithms)
    records, counts = fixture_comparison(
        args.trials,
        args.requests,
        algorithms,
        base_seed=args.seed,
        exact_cap=args.exact_cap,
    )

    stream = _out_stream(args.out)
    try:
        write_trials_csv(records, stream)
    finally:
        if args.out:
            stream.close()

    model_names = {m: name for m, (name, _, _) in enumerate(REAL_WORLD_MODELS, start=1)}
    ordered = [a for a in ALGORITHM_ORDER if a in set(algorithms)]
    freq_stream = open(args.freq_out, "w", newline="") if args.freq_out else sys.stdout
    try:
        writer = csv.writer(freq_stream)
        writer.writerow(["model"] + [a.value for a in ordered])
        for model_id, name in model_names.items():
            writer.writerow([name] + [counts[a][model_id] for a in ordered])
    finally:
        if args.freq_out:
            freq_stream.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pies",
        description="Placement and scheduling of multi-implementation edge services",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a scenario file")
    _add_common_gen_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run one solver on a scenario file")
    p.add_argument("scenario")
    p.add_argument("--algorithm", default="egp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="run several solvers on one scenario")
    p.add_argument("scenario")
    p.add_argument("--algorithms", default="exact,agp,egp,sck,rnd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="trials over growing user counts, CSV out")
    _add_common_gen_flags(p)
    p.add_argument("--user-counts", required=True, help="comma-separated counts")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--algorithms", default="exact,agp,egp,sck,rnd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ann-demo", help="compare solvers on a neural-network scenario")
    p.add_argument("--num-users", type=int, default=30)
    p.add_argument("--num-edges", type=int)
    p.add_argument("--num-services", type=int)
    p.add_argument("--algorithms", default="exact,agp,egp,sck,rnd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ann_demo)

    p = sub.add_parser(
        "fixture", help="image-classification fixture trials and placement counts"
    )
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--requests", type=int, default=100)
    p.add_argument("--algorithms", default="exact,agp,egp,sck,rnd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact-cap", type=int, default=DEFAULT_EXACT_CAP)
    p.add_argument("--out")
    p.add_argument("--freq-out", help="CSV for per-model placement counts")
    p.set_defaults(func=cmd_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
