"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints a single summary line (run pytest with -s to see them
all); the heavyweight validation sweep is shared by the tests that need
it and runs once per session.
"""

import math
import time

import numpy as np
import pytest

from pies import (
    Algorithm,
    AnnArchitecture,
    AnnGenParams,
    AnnHyperparams,
    GenParams,
    agp,
    ann_objective,
    ann_scenario,
    approximation_summary,
    assignment_value,
    derive_pnn,
    derive_snn,
    exact,
    generate,
    mst_oracle,
    objective_value,
    oms,
    real_world_fixture,
    sigma,
    sweep,
)
from pies.cli import main
from pies.harness import fixture_comparison
from helpers import (
    enumerate_optimal_value,
    random_feasible_placement,
    tiny_params,
)

ALL_FIVE = (Algorithm.EXACT, Algorithm.AGP, Algorithm.EGP, Algorithm.SCK, Algorithm.RND)
SWEEP_SEED = 2024


def _verdict(name, ok, detail):
    print(f"[acceptance] {name}: {detail} -> {'PASS' if ok else 'FAIL'}")
    return ok


@pytest.fixture(scope="module")
def exact_suite():
    """200 seeded desk-scale instances with their exact optima."""
    instances = []
    started = time.perf_counter()
    for seed in range(200):
        scenario = generate(tiny_params(num_users=10), seed)
        report = exact(scenario, max_models_per_edge=40)
        instances.append((scenario, report))
    elapsed = time.perf_counter() - started
    return instances, elapsed


@pytest.fixture(scope="module")
def validation_sweep():
    params = GenParams(
        num_users=0,
        num_edges=10,
        num_services=20,
        models_per_service_range=(1, 5),
    )
    started = time.perf_counter()
    records = sweep(
        params,
        [50, 100, 150, 200, 250],
        trials_per_point=10,
        algorithms=ALL_FIVE,
        base_seed=SWEEP_SEED,
        exact_cap=300,
    )
    elapsed = time.perf_counter() - started
    return records, elapsed


def test_exact_matches_exhaustive_enumeration(exact_suite):
    instances, solve_time = exact_suite
    started = time.perf_counter()
    worst = 0.0
    for scenario, report in instances:
        reference = enumerate_optimal_value(scenario)
        worst = max(worst, abs(report.objective - reference))
    total = solve_time + (time.perf_counter() - started)
    ok = worst <= 1e-9 and total < 10.0
    assert _verdict(
        "exact equals exhaustive enumeration on 200 instances",
        ok,
        f"max deviation {worst:.2e}, total {total:.1f}s",
    )


def test_scheduling_equals_spanning_tree_oracle():
    rng = np.random.default_rng(77)
    started = time.perf_counter()
    worst = 0.0
    for i in range(500):
        scenario = generate(tiny_params(num_users=int(rng.integers(1, 16))), 1000 + i)
        placement = random_feasible_placement(scenario, rng)
        left = objective_value(scenario, oms(scenario, placement))
        right = mst_oracle(scenario, placement)
        worst = max(worst, abs(left - right))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-12 and elapsed < 5.0
    assert _verdict(
        "optimal scheduling equals spanning-tree oracle on 500 pairs",
        ok,
        f"max deviation {worst:.2e}, {elapsed:.1f}s",
    )


def test_sigma_monotone_and_submodular():
    rng = np.random.default_rng(78)
    started = time.perf_counter()
    monotone_violations = 0
    submodular_violations = 0
    checked = 0
    while checked < 1000:
        scenario = generate(tiny_params(num_users=10), 2000 + checked)
        ground = [
            (e.edge_id, key)
            for e in scenario.edges
            for key in scenario.model_keys()
        ]
        for _ in range(10):
            mask = rng.random(len(ground))
            b = {p for p, r in zip(ground, mask) if r < 0.45}
            a = {p for p in b if rng.random() < 0.6}
            rest = [p for p in ground if p not in b]
            if not rest:
                continue
            p = rest[int(rng.integers(len(rest)))]
            sa, sb = sigma(scenario, a), sigma(scenario, b)
            if sa > sb:
                monotone_violations += 1
            gain_a = sigma(scenario, a | {p}) - sa
            gain_b = sigma(scenario, b | {p}) - sb
            if gain_a < gain_b - 1e-12:
                submodular_violations += 1
            checked += 1
            if checked == 1000:
                break
    elapsed = time.perf_counter() - started
    ok = monotone_violations == 0 and submodular_violations == 0 and elapsed < 30.0
    assert _verdict(
        "sigma monotone and submodular on 1000 sampled triples",
        ok,
        f"{monotone_violations} monotonicity / {submodular_violations} marginal-gain "
        f"violations, {elapsed:.1f}s",
    )


def test_agp_approximation_bound(exact_suite):
    instances, _ = exact_suite
    bound = 1.0 - 1.0 / math.e
    started = time.perf_counter()
    holds = 0
    for scenario, report in instances:
        if agp(scenario).objective >= bound * report.objective - 1e-9:
            holds += 1
    elapsed = time.perf_counter() - started
    ok = holds == len(instances) and elapsed < 60.0
    assert _verdict(
        "greedy guarantee holds on all 200 instances",
        ok,
        f"{holds}/{len(instances)} at bound {bound:.4f}, {elapsed:.1f}s",
    )


def test_validation_sweep_ratios(validation_sweep):
    records, elapsed = validation_sweep
    assert len(records) == 5 * 10 * len(ALL_FIVE)
    assert all(0.0 <= r.approx_ratio <= 1.0 + 1e-9 for r in records)
    summary = approximation_summary(records)
    agp_mean = summary[Algorithm.AGP].mean
    egp_mean = summary[Algorithm.EGP].mean
    ok = agp_mean >= 0.85 and egp_mean >= 0.85 and abs(agp_mean - egp_mean) <= 0.05
    assert _verdict(
        "validation-sweep approximation ratios",
        ok,
        f"mean AGP {agp_mean:.4f}, mean EGP {egp_mean:.4f}, sweep {elapsed:.0f}s",
    )


def test_baseline_ordering(validation_sweep):
    records, _ = validation_sweep
    def mean_objective(alg):
        values = [r.objective for r in records if r.algorithm is alg]
        return sum(values) / len(values)

    egp_mean = mean_objective(Algorithm.EGP)
    sck_mean = mean_objective(Algorithm.SCK)
    rnd_mean = mean_objective(Algorithm.RND)
    ok = egp_mean >= 1.2 * sck_mean and sck_mean >= rnd_mean
    assert _verdict(
        "baseline ordering (efficient greedy vs knapsack vs random)",
        ok,
        f"EGP {egp_mean:.2f} >= 1.2 x SCK {sck_mean:.2f}; SCK >= RND {rnd_mean:.2f}",
    )


def test_runtime_ordering(validation_sweep):
    records, _ = validation_sweep
    at_max = [r for r in records if r.num_users == 250]
    agp_times = {r.trial: r.runtime_seconds for r in at_max if r.algorithm is Algorithm.AGP}
    egp_times = {r.trial: r.runtime_seconds for r in at_max if r.algorithm is Algorithm.EGP}
    trials = sorted(agp_times)
    faster = sum(1 for t in trials if egp_times[t] < agp_times[t])
    ok = faster / len(trials) >= 0.95
    assert _verdict(
        "efficient greedy faster than value-oracle greedy at 250 users",
        ok,
        f"faster in {faster}/{len(trials)} trials",
    )


def test_fixture_places_mobilenet():
    algorithms = (Algorithm.EXACT, Algorithm.AGP, Algorithm.EGP, Algorithm.SCK)
    started = time.perf_counter()
    records, counts = fixture_comparison(
        trials=100, num_requests=100, algorithms=algorithms, base_seed=0
    )
    mobilenet = 2  # catalog position of mobilenet

    # oracle: per trial, the exact choice must attain the best single-model
    # total, recomputed by direct comparison over all six models
    exact_rows = [r for r in records if r.algorithm is Algorithm.EXACT]
    for row in exact_rows:
        scenario = real_world_fixture(row.seed, 100)
        totals = {
            m: math.fsum(
                assignment_value(scenario, r.user_id, (1, m)) for r in scenario.requests
            )
            for m in (1, 2, 3, 4, 5, 6)
        }
        assert row.objective == pytest.approx(max(totals.values()), abs=1e-9)

    elapsed = time.perf_counter() - started
    per_alg = {alg.value: counts[alg][mobilenet] for alg in algorithms}
    ok = all(count >= 90 for count in per_alg.values())
    assert _verdict(
        "fixture places mobilenet in >= 90/100 trials",
        ok,
        f"{per_alg}, {elapsed:.0f}s",
    )


def test_ann_extension_properties():
    defaults = AnnHyperparams()
    ten = AnnArchitecture(tuple([16] * 10), tuple([1] * 10))
    pnn_arch, _, _ = derive_pnn(ten, 10, 0.8, defaults, seed=0)
    four = AnnArchitecture((8, 6, 4, 2), (1, 1, 1, 1))
    snn_model, _, _ = derive_snn(four, 10, 0.8, defaults)

    rng = np.random.default_rng(91)
    ordering_ok = True
    for _ in range(100):
        layers = int(rng.integers(2, 10))
        dnn = AnnArchitecture(
            tuple(int(n) for n in rng.integers(1, 128, size=layers)),
            tuple(int(c) for c in rng.integers(1, 10, size=layers)),
        )
        accuracy = float(rng.uniform(0.2, 1.0))
        _, _, pnn_acc = derive_pnn(dnn, 12, accuracy, defaults, seed=1)
        _, _, snn_acc = derive_snn(dnn, 12, accuracy, defaults)
        if not (pnn_acc < snn_acc < accuracy):
            ordering_ok = False

    scenario = ann_scenario(AnnGenParams(num_users=25), seed=17)
    report = exact(scenario, max_models_per_edge=40)
    free = ann_objective(scenario, report.schedule, theta=0.0)
    plain = objective_value(scenario, report.schedule)
    zero_theta_ok = abs(free - plain) <= 1e-12

    ok = (
        pnn_arch.num_layers == 8
        and snn_model.split_index == 2
        and ordering_ok
        and zero_theta_ok
    )
    assert _verdict(
        "network derivations, accuracy ordering, zero-penalty equivalence",
        ok,
        f"layers {pnn_arch.num_layers}, split {snn_model.split_index}, "
        f"theta0 gap {abs(free - plain):.2e}",
    )


def test_sweep_deterministic_csv(tmp_path):
    flags = [
        "sweep",
        "--num-edges", "2",
        "--num-services", "4",
        "--user-counts", "4,6",
        "--trials", "2",
        "--algorithms", "exact,agp,egp,sck,rnd",
        "--seed", "11",
        "--exact-cap", "64",
    ]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert main(flags + ["--out", str(first)]) == 0
    assert main(flags + ["--out", str(second)]) == 0

    def strip_runtime(path):
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        drop = header.index("runtime_sec")
        return [
            ",".join(col for i, col in enumerate(line.split(",")) if i != drop)
            for line in lines
        ]

    ok = strip_runtime(first) == strip_runtime(second)
    assert _verdict(
        "repeated sweep produces identical CSV apart from runtimes",
        ok,
        f"{len(strip_runtime(first))} rows compared",
    )
