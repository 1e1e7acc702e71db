"""Solver correctness, baselines, and cross-solver invariants."""

import math

import numpy as np
import pytest

from pies import (
    Algorithm,
    EdgeCloud,
    InstanceTooLargeError,
    Scenario,
    Service,
    UserRequest,
    agp,
    egp,
    exact,
    generate,
    objective_value,
    rnd,
    sck,
    sigma,
    solve,
    validate,
)
from pies.placement import _edge_knapsack, _sibling_value
from helpers import (
    enumerate_optimal_value,
    quick_model,
    quick_user,
    scenario_one_edge,
    tiny_params,
)


def test_exact_zero_storage_places_nothing():
    models = [quick_model(1, 1, 0.9)]
    s = scenario_one_edge(models, [quick_user(1, 1)], capacity=0)
    report = exact(s)
    assert report.placement.placed == frozenset()
    assert report.objective == 0.0


def test_exact_places_single_useful_model_everywhere():
    model = quick_model(1, 1, 0.8)
    edges = (
        EdgeCloud(1, 100.0, 100.0, 5),
        EdgeCloud(2, 100.0, 100.0, 5),
        EdgeCloud(3, 100.0, 100.0, 5),  # covers nobody
    )
    requests = (
        UserRequest(1, 1, 1, 1.0, 10.0),
        UserRequest(2, 2, 1, 1.0, 10.0),
    )
    s = Scenario(edges, (Service(1, (model,)),), requests, 10.0)
    report = exact(s)
    assert report.placement.placed == {(1, 1, 1), (2, 1, 1)}
    assert report.objective == pytest.approx(2 * 0.9, abs=1e-12)


def test_exact_matches_enumeration():
    for seed in range(30):
        s = generate(tiny_params(), seed)
        report = exact(s, max_models_per_edge=30)
        assert report.objective == pytest.approx(
            enumerate_optimal_value(s), abs=1e-9
        )
        assert validate(s, report.placement, report.schedule) == []


def test_exact_rejects_oversized_edges():
    s = generate(tiny_params(), 0)
    with pytest.raises(InstanceTooLargeError):
        exact(s, max_models_per_edge=1)


def test_agp_single_candidate_matches_exact():
    models = [quick_model(1, 1, 0.8)]
    s = scenario_one_edge(models, [quick_user(1, 1)], capacity=1)
    assert agp(s).objective == exact(s).objective
    assert agp(s).placement.placed == {(1, 1, 1)}


def test_agp_bound_on_random_instances():
    bound = 1 - 1 / math.e
    for seed in range(40):
        s = generate(tiny_params(), seed)
        best = exact(s, max_models_per_edge=30).objective
        got = agp(s).objective
        assert got >= bound * best - 1e-9


def test_agp_picks_dominating_model_first():
    # model 2 satisfies both users outright; model 1 only partially
    models = [quick_model(1, 1, 0.4), quick_model(1, 2, 0.95)]
    users = [quick_user(1, 1, alpha=0.9), quick_user(2, 1, alpha=0.9)]
    s = scenario_one_edge(models, users, capacity=1)  # room for one
    report = agp(s)
    assert report.placement.placed == {(1, 1, 2)}
    # the greedy choice agrees with exhaustive sigma comparison
    assert sigma(s, {(1, (1, 2))}) > sigma(s, {(1, (1, 1))})


def test_egp_places_single_model():
    models = [quick_model(1, 1, 0.8)]
    s = scenario_one_edge(models, [quick_user(1, 1, alpha=0.5)], capacity=3)
    report = egp(s)
    assert report.placement.placed == {(1, 1, 1)}
    assert report.schedule.assigned == {1: 1}


def test_egp_sibling_value_arithmetic():
    # placed model worth 0.8 to the lone unsatisfied user, sibling worth 0.9
    models = [quick_model(1, 1, 0.6), quick_model(1, 2, 0.8)]
    s = scenario_one_edge(models, [quick_user(1, 1)])
    users = s.users_at(1)
    updated = _sibling_value(s, users, set(), sibling=(1, 2), placed_key=(1, 1))
    assert updated == pytest.approx(0.9 - 0.8, abs=1e-12)
    # satisfied users drop out of the update entirely
    assert _sibling_value(s, users, {1}, sibling=(1, 2), placed_key=(1, 1)) == 0.0


def test_egp_stops_at_satisfied_users():
    # one model fully satisfies the user: its sibling is never placed
    models = [quick_model(1, 1, 0.9), quick_model(1, 2, 0.85)]
    s = scenario_one_edge(models, [quick_user(1, 1, alpha=0.5)], capacity=10)
    report = egp(s)
    assert report.placement.placed == {(1, 1, 1)}


def test_knapsack_hand_case():
    chosen = _edge_knapsack([3, 2, 2], [4.0, 3.0, 2.0], 5)
    assert chosen == [0, 1]


def test_knapsack_item_exceeding_capacity():
    assert _edge_knapsack([7], [9.0], 5) == []
    models = [quick_model(1, 1, 0.9, storage=7)]
    s = scenario_one_edge(models, [quick_user(1, 1)], capacity=5)
    report = sck(s)
    assert report.placement.placed == frozenset()


def test_sck_double_counts_redundant_siblings():
    # two implementations of service 1 both fully satisfy its three users;
    # service 2 has one requester. Greedy-optimal keeps one sibling plus
    # the service-2 model; the knapsack's doubled item values pick both
    # siblings instead.
    m11 = quick_model(1, 1, 0.95)
    m12 = quick_model(1, 2, 0.94)
    m21 = quick_model(2, 1, 0.9)
    users = [
        quick_user(1, 1, alpha=0.5),
        quick_user(2, 1, alpha=0.5),
        quick_user(3, 1, alpha=0.5),
        quick_user(4, 2, alpha=0.95),
    ]
    s = scenario_one_edge([m11, m12, m21], users, capacity=2)
    sck_report = sck(s)
    exact_report = exact(s)
    assert sck_report.placement.placed == {(1, 1, 1), (1, 1, 2)}
    assert exact_report.placement.placed == {(1, 1, 1), (1, 2, 1)}
    assert sck_report.objective <= exact_report.objective


def test_egp_desk_scale_mean_ratio():
    ratios = []
    for seed in range(20):
        users = 5 + (seed % 16)  # up to 20
        s = generate(tiny_params(num_users=users, num_services=5), 200 + seed)
        best = exact(s, max_models_per_edge=40).objective
        if best > 0:
            ratios.append(egp(s).objective / best)
    assert sum(ratios) / len(ratios) >= 0.85


def test_rnd_zero_storage():
    s = generate(tiny_params(storage_capacity_range=(0, 0)), 1)
    report = rnd(s, 9)
    assert report.objective == 0.0
    assert report.placement.placed == frozenset()


def test_rnd_deterministic_per_seed():
    s = generate(tiny_params(), 2)
    a = rnd(s, 123)
    b = rnd(s, 123)
    assert a.placement == b.placement
    assert a.schedule.assigned == b.schedule.assigned
    assert a.objective == b.objective
    c = rnd(s, 124)
    assert (
        c.placement != a.placement
        or c.schedule.assigned != a.schedule.assigned
    )


def test_rnd_mean_below_egp():
    s = generate(tiny_params(num_users=15), 4)
    egp_objective = egp(s).objective
    mean = np.mean([rnd(s, seed).objective for seed in range(100)])
    assert mean <= egp_objective


def test_all_solvers_feasible_and_bounded_by_exact():
    for seed in range(15):
        s = generate(tiny_params(num_users=12), seed)
        best = exact(s, max_models_per_edge=30)
        assert validate(s, best.placement, best.schedule) == []
        for alg in (Algorithm.AGP, Algorithm.EGP, Algorithm.SCK, Algorithm.RND):
            report = solve(s, alg, seed=seed)
            assert validate(s, report.placement, report.schedule) == []
            assert report.objective <= best.objective + 1e-9
            assert report.placed_count == len(report.placement.placed)
            assert report.scheduled_count == len(report.schedule.assigned)
            assert report.objective == pytest.approx(
                objective_value(s, report.schedule), abs=1e-12
            )


def test_greedy_traces_monotone():
    # placing one more feasible triple never decreases sigma
    rng = np.random.default_rng(31)
    for seed in range(10):
        s = generate(tiny_params(), seed)
        report = egp(s)
        pairs = sorted(report.placement.pairs())
        running = set()
        previous = 0.0
        for pair in pairs:
            running.add(pair)
            value = sigma(s, running)
            assert value >= previous - 1e-12
            previous = value
