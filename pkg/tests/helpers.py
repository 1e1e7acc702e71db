"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np

from pies import (
    EdgeCloud,
    GenParams,
    Placement,
    Scenario,
    Service,
    ServiceModelSpec,
    UserRequest,
    assignment_value,
)


def scenario_one_edge(models, users, capacity=10, comm=1000.0, comp=1000.0, delay_max=10.0):
    """Single-edge scenario from flat model/user lists."""
    by_service = {}
    for m in models:
        by_service.setdefault(m.service_id, []).append(m)
    services = tuple(
        Service(sid, tuple(ms)) for sid, ms in sorted(by_service.items())
    )
    return Scenario(
        edges=(EdgeCloud(1, comm, comp, capacity),),
        services=services,
        requests=tuple(users),
        delay_max=delay_max,
    )


def quick_model(service_id, model_id, accuracy, storage=1, comm_cost=0.001, comp_cost=0.001):
    return ServiceModelSpec(service_id, model_id, accuracy, comm_cost, comp_cost, storage)


def quick_user(user_id, service_id, edge_id=1, alpha=1.0, delta=10.0):
    return UserRequest(user_id, edge_id, service_id, alpha, delta)


# Desk-scale random instances small enough for exhaustive enumeration.
def tiny_params(num_users=10, **overrides) -> GenParams:
    fields = dict(
        num_users=num_users,
        num_edges=2,
        num_services=4,
        models_per_service_range=(1, 3),
        comm_capacity_range=(30, 60),
        comp_capacity_range=(30, 60),
        storage_capacity_range=(10, 20),
        comm_cost_range=(15, 30),
        comp_cost_range=(15, 30),
        storage_cost_range=(1, 2),
    )
    fields.update(overrides)
    return GenParams(**fields)


def enumerate_optimal_value(scenario: Scenario) -> float:
    """Exhaustive search over all storage-feasible placements, per edge.

    Plain depth-first include/exclude enumeration with no bounding; kept
    deliberately independent of the solvers it checks.
    """
    total = 0.0
    for edge in scenario.edges:
        users = scenario.users_at(edge.edge_id)
        keys = [
            key
            for key in scenario.model_keys()
            if scenario.model(*key).storage_cost <= edge.storage_capacity
        ]
        if not users or not keys:
            continue
        weights = [scenario.model(*key).storage_cost for key in keys]
        values = [
            [assignment_value(scenario, req.user_id, key) for key in keys]
            for req in users
        ]
        n, n_users = len(keys), len(users)
        best = 0.0
        user_best = [0.0] * n_users

        def dfs(i: int, remaining: int, running: float) -> None:
            nonlocal best
            if running > best:
                best = running
            if i == n:
                return
            dfs(i + 1, remaining, running)
            if weights[i] <= remaining:
                touched = []
                gain = 0.0
                for u in range(n_users):
                    v = values[u][i]
                    if v > user_best[u]:
                        touched.append((u, user_best[u]))
                        gain += v - user_best[u]
                        user_best[u] = v
                dfs(i + 1, remaining - weights[i], running + gain)
                for u, old in touched:
                    user_best[u] = old

        dfs(0, edge.storage_capacity, 0.0)
        total += best
    return total


def random_feasible_placement(scenario: Scenario, rng: np.random.Generator) -> Placement:
    """Random storage-respecting placement: shuffled first-fit per edge,
    stopping early at a random point so densities vary."""
    triples = set()
    keys = list(scenario.model_keys())
    for edge in scenario.edges:
        remaining = edge.storage_capacity
        order = rng.permutation(len(keys))
        stop = int(rng.integers(0, len(keys) + 1))
        for idx in order[:stop]:
            s, m = keys[int(idx)]
            cost = scenario.model(s, m).storage_cost
            if cost <= remaining:
                triples.add((edge.edge_id, s, m))
                remaining -= cost
    return Placement.from_triples(triples)
