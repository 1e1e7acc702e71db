"""Batch experiment driver: trials, approximation ratios, CSV output.

Per-trial seeds are derived from the base seed and the trial coordinates,
so any single trial can be reproduced in isolation. Runtime columns are
the only nondeterministic part of the output.
"""

from __future__ import annotations

import csv
import statistics
from collections import Counter
from dataclasses import dataclass, replace
from typing import IO, Iterable, Mapping, Optional, Sequence

import numpy as np

from .generator import GenParams, generate, real_world_fixture
from .model import Scenario
from .placement import DEFAULT_EXACT_CAP, Algorithm, SolveReport, solve

CSV_COLUMNS = (
    "trial",
    "seed",
    "num_users",
    "algorithm",
    "num_placed",
    "num_scheduled",
    "expected_qos",
    "approx_ratio",
    "runtime_sec",
)

# Fixed execution and reporting order for solvers.
ALGORITHM_ORDER = (
    Algorithm.EXACT,
    Algorithm.AGP,
    Algorithm.EGP,
    Algorithm.SCK,
    Algorithm.RND,
)


@dataclass(frozen=True)
class TrialRecord:
    """One solver's outcome on one trial scenario."""

    trial: int
    seed: int
    num_users: int
    algorithm: Algorithm
    placed_count: int
    scheduled_count: int
    objective: float
    approx_ratio: Optional[float]
    runtime_seconds: float


def derive_seeds(*coordinates: int, n: int = 1) -> list[int]:
    """Stable seeds from a tuple of integer coordinates."""
    unsigned = tuple(int(c) & 0xFFFFFFFFFFFFFFFF for c in coordinates)
    seq = np.random.SeedSequence(unsigned)
    return [int(s) for s in seq.generate_state(n, np.uint64)]


def _ordered(algorithms: Iterable[Algorithm]) -> list[Algorithm]:
    wanted = set(algorithms)
    return [a for a in ALGORITHM_ORDER if a in wanted]


def _records_from_reports(
    scenario: Scenario,
    ordered: Sequence[Algorithm],
    reports: Mapping[Algorithm, SolveReport],
    trial: int,
    seed: int,
) -> list[TrialRecord]:
    exact_objective = (
        reports[Algorithm.EXACT].objective if Algorithm.EXACT in reports else None
    )
    records = []
    for alg in ordered:
        report = reports[alg]
        ratio = None
        if exact_objective is not None:
            ratio = (
                report.objective / exact_objective if exact_objective > 0 else 1.0
            )
        records.append(
            TrialRecord(
                trial=trial,
                seed=seed,
                num_users=scenario.num_users,
                algorithm=alg,
                placed_count=report.placed_count,
                scheduled_count=report.scheduled_count,
                objective=report.objective,
                approx_ratio=ratio,
                runtime_seconds=report.runtime,
            )
        )
    return records


def run_comparison(
    scenario: Scenario,
    algorithms: Iterable[Algorithm],
    seed: int,
    trial: int = 0,
    exact_cap: int = DEFAULT_EXACT_CAP,
) -> list[TrialRecord]:
    """Run the requested solvers on one scenario.

    Approximation ratios are filled in only when the exact solver is part
    of the comparison; its own ratio is exactly 1.
    """
    ordered = _ordered(algorithms)
    if not ordered:
        raise ValueError("no algorithms requested")
    reports = {
        alg: solve(scenario, alg, seed=seed, exact_cap=exact_cap) for alg in ordered
    }
    return _records_from_reports(scenario, ordered, reports, trial, seed)


def sweep(
    params: GenParams,
    user_counts: Sequence[int],
    trials_per_point: int,
    algorithms: Iterable[Algorithm],
    base_seed: int,
    exact_cap: int = DEFAULT_EXACT_CAP,
) -> list[TrialRecord]:
    """Fresh seeded scenario per (user count, trial), solved by each solver.

    Records come back ordered by (num_users, trial, algorithm).
    """
    if not user_counts:
        raise ValueError("user_counts must not be empty")
    ordered = _ordered(algorithms)
    records: list[TrialRecord] = []
    for count in user_counts:
        point_params = replace(params, num_users=count)
        for trial in range(trials_per_point):
            # one seed per trial: a CSV row alone rebuilds its scenario
            # and reruns the comparison
            (trial_seed,) = derive_seeds(base_seed, count, trial)
            scenario = generate(point_params, trial_seed)
            records.extend(
                run_comparison(
                    scenario,
                    ordered,
                    seed=trial_seed,
                    trial=trial,
                    exact_cap=exact_cap,
                )
            )
    return records


def fixture_comparison(
    trials: int,
    num_requests: int,
    algorithms: Iterable[Algorithm],
    base_seed: int,
    exact_cap: int = DEFAULT_EXACT_CAP,
    transmission_time: float = 0.05,
) -> tuple[list[TrialRecord], dict[Algorithm, Counter]]:
    """Seeded image-classification fixture trials.

    Returns the trial records plus, per algorithm, how many trials placed
    each model id (the placement-frequency view of the fixture).
    """
    ordered = _ordered(algorithms)
    if not ordered:
        raise ValueError("no algorithms requested")
    records: list[TrialRecord] = []
    placement_counts: dict[Algorithm, Counter] = {alg: Counter() for alg in ordered}
    for trial in range(trials):
        (trial_seed,) = derive_seeds(base_seed, trial)
        scenario = real_world_fixture(
            trial_seed, num_requests, transmission_time=transmission_time
        )
        reports = {
            alg: solve(scenario, alg, seed=trial_seed, exact_cap=exact_cap)
            for alg in ordered
        }
        records.extend(
            _records_from_reports(scenario, ordered, reports, trial, trial_seed)
        )
        for alg in ordered:
            for _, _, model_id in reports[alg].placement.placed:
                placement_counts[alg][model_id] += 1
    return records, placement_counts


@dataclass(frozen=True)
class RatioSummary:
    mean: float
    std: float
    count: int


def approximation_summary(
    records: Iterable[TrialRecord],
) -> dict[Algorithm, RatioSummary]:
    """Mean/std of per-trial objective ratios against the exact optimum.

    Every (num_users, trial) group must contain an exact row.
    """
    groups: dict[tuple[int, int], list[TrialRecord]] = {}
    for record in records:
        groups.setdefault((record.num_users, record.trial), []).append(record)

    ratios: dict[Algorithm, list[float]] = {}
    for key, group in sorted(groups.items()):
        exact_rows = [r for r in group if r.algorithm is Algorithm.EXACT]
        if not exact_rows:
            raise ValueError(
                f"no exact row for num_users={key[0]} trial={key[1]}; "
                "ratios need the exact optimum"
            )
        exact_objective = exact_rows[0].objective
        for record in group:
            ratio = (
                record.objective / exact_objective if exact_objective > 0 else 1.0
            )
            ratios.setdefault(record.algorithm, []).append(ratio)

    return {
        alg: RatioSummary(
            mean=statistics.fmean(values),
            std=statistics.pstdev(values),
            count=len(values),
        )
        for alg, values in ratios.items()
    }


def _row(record: TrialRecord) -> dict:
    return {
        "trial": record.trial,
        "seed": record.seed,
        "num_users": record.num_users,
        "algorithm": record.algorithm.value,
        "num_placed": record.placed_count,
        "num_scheduled": record.scheduled_count,
        "expected_qos": repr(record.objective),
        "approx_ratio": "" if record.approx_ratio is None else repr(record.approx_ratio),
        "runtime_sec": repr(record.runtime_seconds),
    }


def aggregate_rows(records: Sequence[TrialRecord]) -> list[dict]:
    """Mean and std rows per (num_users, algorithm), in column format."""
    groups: dict[tuple[int, Algorithm], list[TrialRecord]] = {}
    for record in records:
        groups.setdefault((record.num_users, record.algorithm), []).append(record)

    def stat_row(kind: str, num_users: int, alg: Algorithm, rows: list[TrialRecord]) -> dict:
        fn = statistics.fmean if kind == "mean" else statistics.pstdev
        ratios = [r.approx_ratio for r in rows if r.approx_ratio is not None]
        return {
            "trial": kind,
            "seed": "",
            "num_users": num_users,
            "algorithm": alg.value,
            "num_placed": repr(fn([r.placed_count for r in rows])),
            "num_scheduled": repr(fn([r.scheduled_count for r in rows])),
            "expected_qos": repr(fn([r.objective for r in rows])),
            "approx_ratio": repr(fn(ratios)) if ratios else "",
            "runtime_sec": repr(fn([r.runtime_seconds for r in rows])),
        }

    out = []
    ordering = {alg: i for i, alg in enumerate(ALGORITHM_ORDER)}
    for (num_users, alg), rows in sorted(
        groups.items(), key=lambda kv: (kv[0][0], ordering[kv[0][1]])
    ):
        out.append(stat_row("mean", num_users, alg, rows))
        out.append(stat_row("std", num_users, alg, rows))
    return out


def write_trials_csv(
    records: Sequence[TrialRecord],
    stream: IO[str],
    aggregates: bool = True,
) -> None:
    """Write records (and optionally aggregate rows) with the fixed schema."""
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for record in records:
        writer.writerow(_row(record))
    if aggregates and records:
        for row in aggregate_rows(records):
            writer.writerow(row)
