"""Placement solvers: exact optimum, two greedy algorithms, two baselines.

The placement decision decomposes per edge cloud because delays depend
only on how many requests an edge covers, never on what other edges
host. Every solver returns a feasible placement plus the schedule that
serves it, wrapped in a :class:`SolveReport`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .model import (
    ModelKey,
    Placement,
    Scenario,
    Schedule,
    assignment_value,
    thresholds_met,
)
from .scheduling import oms, sigma

DEFAULT_EXACT_CAP = 25


class Algorithm(Enum):
    EXACT = "exact"
    AGP = "agp"
    EGP = "egp"
    SCK = "sck"
    RND = "rnd"


class InstanceTooLargeError(RuntimeError):
    """Raised when the exact solver refuses an edge with too many candidate models."""

    def __init__(self, edge_id: int, count: int, cap: int):
        self.edge_id = edge_id
        self.count = count
        self.cap = cap
        super().__init__(
            f"edge {edge_id} has {count} candidate models, "
            f"exact solver cap is {cap}"
        )


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solver run on one scenario."""

    algorithm: Algorithm
    placement: Placement
    schedule: Schedule
    objective: float
    placed_count: int
    scheduled_count: int
    runtime: float


def _schedule_objective(scenario: Scenario, schedule: Schedule) -> float:
    # Sum of solver-facing values; equals the plain QoS objective except
    # in neural-network mode, where it carries the split-model penalty.
    terms = []
    for user_id, model_id in schedule.assigned.items():
        req = scenario.request(user_id)
        terms.append(
            assignment_value(scenario, user_id, (req.requested_service, model_id))
        )
    return math.fsum(terms)


def _report(
    scenario: Scenario,
    algorithm: Algorithm,
    triples: Iterable[tuple[int, int, int]],
    started: float,
    schedule: Optional[Schedule] = None,
) -> SolveReport:
    placement = Placement.from_triples(triples)
    if schedule is None:
        schedule = oms(scenario, placement)
    objective = _schedule_objective(scenario, schedule)
    return SolveReport(
        algorithm=algorithm,
        placement=placement,
        schedule=schedule,
        objective=objective,
        placed_count=len(placement),
        scheduled_count=len(schedule),
        runtime=time.perf_counter() - started,
    )


def _candidate_models(scenario: Scenario, edge_id: int) -> list[ModelKey]:
    """Models worth considering on an edge: implementations of services
    its covered users request, small enough to fit the edge at all."""
    capacity = scenario.edge(edge_id).storage_capacity
    wanted = {req.requested_service for req in scenario.users_at(edge_id)}
    keys = [
        key
        for key in scenario.model_keys()
        if key[0] in wanted and scenario.model(*key).storage_cost <= capacity
    ]
    return keys


# ---------------------------------------------------------------------------
# Exact solver


def exact(scenario: Scenario, max_models_per_edge: int = DEFAULT_EXACT_CAP) -> SolveReport:
    """Globally optimal placement.

    Per edge, the objective further decomposes by service: users of
    different services never share a model, so they only compete for
    storage. The optimum is therefore found by enumerating per-service
    model subsets and combining them with a dynamic program over the
    edge's storage budget. Refuses edges whose candidate model count
    exceeds `max_models_per_edge`.
    """
    started = time.perf_counter()
    triples: set[tuple[int, int, int]] = set()
    for edge in scenario.edges:
        users = scenario.users_at(edge.edge_id)
        if not users:
            continue
        items = _candidate_models(scenario, edge.edge_id)
        if len(items) > max_models_per_edge:
            raise InstanceTooLargeError(edge.edge_id, len(items), max_models_per_edge)
        subset = _edge_optimum(scenario, edge.edge_id, items)
        triples.update((edge.edge_id, s, m) for s, m in subset)
    return _report(scenario, Algorithm.EXACT, triples, started)


def _service_options(
    scenario: Scenario,
    users: Sequence,
    model_keys: Sequence[ModelKey],
    capacity: int,
) -> list[tuple[int, float, int]]:
    """Non-dominated (weight, value, subset mask) choices for one service.

    Enumerates every subset of the service's models that fits `capacity`,
    scoring it by the best value it offers each requester. Dominated
    subsets (no lighter, no better) are dropped; lower masks win ties, so
    the result is deterministic.
    """
    m = len(model_keys)
    weights = [scenario.model(*key).storage_cost for key in model_keys]
    service_id = model_keys[0][0]
    requesters = [r for r in users if r.requested_service == service_id]
    values = [
        [assignment_value(scenario, req.user_id, key) for key in model_keys]
        for req in requesters
    ]

    n_masks = 1 << m
    mask_weight = [0] * n_masks
    mask_value = [0.0] * n_masks
    # per-user best over the mask, built from mask minus its lowest bit
    user_best = [[0.0] * n_masks for _ in requesters]
    for mask in range(1, n_masks):
        low = mask & -mask
        idx = low.bit_length() - 1
        rest = mask ^ low
        mask_weight[mask] = mask_weight[rest] + weights[idx]
        total = 0.0
        for u in range(len(requesters)):
            row = user_best[u]
            v = values[u][idx]
            best = row[rest] if row[rest] > v else v
            row[mask] = best
            total += best
        mask_value[mask] = total

    best_by_weight: dict[int, tuple[float, int]] = {}
    for mask in range(n_masks):
        w = mask_weight[mask]
        if w > capacity:
            continue
        known = best_by_weight.get(w)
        if known is None or mask_value[mask] > known[0]:
            best_by_weight[w] = (mask_value[mask], mask)

    options: list[tuple[int, float, int]] = []
    best_so_far = -1.0
    for w in sorted(best_by_weight):
        value, mask = best_by_weight[w]
        if value > best_so_far:
            options.append((w, value, mask))
            best_so_far = value
    return options


def _edge_optimum(
    scenario: Scenario, edge_id: int, items: Sequence[ModelKey]
) -> list[ModelKey]:
    users = scenario.users_at(edge_id)
    capacity = scenario.edge(edge_id).storage_capacity
    if not items or not users:
        return []

    by_service: dict[int, list[ModelKey]] = {}
    for key in items:
        by_service.setdefault(key[0], []).append(key)
    groups = [
        (sorted(keys), _service_options(scenario, users, sorted(keys), capacity))
        for _, keys in sorted(by_service.items())
    ]

    # Knapsack over services: each service contributes one subset option.
    dp = [0.0] * (capacity + 1)
    picks: list[list[int]] = []
    for _, options in groups:
        new_dp = [0.0] * (capacity + 1)
        pick = [0] * (capacity + 1)
        for budget in range(capacity + 1):
            best_value = dp[budget]  # empty choice
            best_option = -1
            for i, (w, v, _) in enumerate(options):
                if w > budget:
                    break
                candidate = dp[budget - w] + v
                if candidate > best_value:
                    best_value, best_option = candidate, i
            new_dp[budget] = best_value
            pick[budget] = best_option
        dp = new_dp
        picks.append(pick)

    chosen: list[ModelKey] = []
    budget = capacity
    for (keys, options), pick in zip(reversed(groups), reversed(picks)):
        i = pick[budget]
        if i < 0:
            continue
        w, _, mask = options[i]
        chosen.extend(keys[b] for b in range(len(keys)) if mask >> b & 1)
        budget -= w
    return chosen


# ---------------------------------------------------------------------------
# Greedy algorithms


def agp(scenario: Scenario) -> SolveReport:
    """Approximate greedy placement.

    Per edge, repeatedly place whichever storage-feasible, not yet placed
    model maximises the optimally-scheduled objective of the accumulated
    placement set, until nothing else fits. Carries the classic
    (1 - 1/e) guarantee of greedy monotone-submodular maximisation.
    """
    started = time.perf_counter()
    placed_pairs: set[tuple[int, ModelKey]] = set()
    all_models = scenario.model_keys()
    storage = {key: scenario.model(*key).storage_cost for key in all_models}
    for edge in scenario.edges:
        local: set[ModelKey] = set()
        remaining = edge.storage_capacity
        while True:
            candidates = [
                key
                for key in all_models
                if key not in local and storage[key] <= remaining
            ]
            if not candidates:
                break
            best_key = None
            best_sigma = -1.0
            for key in candidates:  # lexicographic order; first strict max wins
                value = sigma(scenario, placed_pairs | {(edge.edge_id, key)})
                if value > best_sigma:
                    best_key, best_sigma = key, value
            local.add(best_key)
            placed_pairs.add((edge.edge_id, best_key))
            remaining -= storage[best_key]
    triples = {(e, s, m) for e, (s, m) in placed_pairs}
    return _report(scenario, Algorithm.AGP, triples, started)


def _sibling_value(
    scenario: Scenario,
    users: Sequence,
    satisfied: set[int],
    sibling: ModelKey,
    placed_key: ModelKey,
) -> float:
    """Remaining benefit of a sibling model once `placed_key` is placed:
    the summed value difference over the edge's still-unsatisfied users."""
    total = 0.0
    for req in users:
        if req.user_id in satisfied:
            continue
        total += assignment_value(scenario, req.user_id, sibling) - assignment_value(
            scenario, req.user_id, placed_key
        )
    return total


def egp(scenario: Scenario) -> SolveReport:
    """Efficient greedy placement.

    Per edge, score every implementation of every requested service by
    the total value it could give covered users, then repeatedly place
    the best-scored unconsidered model that fits. After a placement, the
    scores of its sibling implementations are rewritten to the benefit
    they would add over the placed one for users not yet fully satisfied.
    Stops when storage runs out, every covered user is satisfied, or all
    scored models have been considered.
    """
    started = time.perf_counter()
    triples: set[tuple[int, int, int]] = set()
    for edge in scenario.edges:
        users = scenario.users_at(edge.edge_id)
        if not users:
            continue
        scores: dict[ModelKey, float] = {}
        for req in users:
            for spec in scenario.service(req.requested_service).models:
                key = spec.key
                scores[key] = scores.get(key, 0.0) + assignment_value(
                    scenario, req.user_id, key
                )
        considered: set[ModelKey] = set()
        satisfied: set[int] = set()
        remaining = edge.storage_capacity
        while True:
            star = min(
                (key for key in scores if key not in considered),
                key=lambda key: (-scores[key], key),
            )
            if scenario.model(*star).storage_cost <= remaining:
                triples.add((edge.edge_id, star[0], star[1]))
                remaining -= scenario.model(*star).storage_cost
                for spec in scenario.service(star[0]).models:
                    sibling = spec.key
                    if sibling in considered:
                        continue
                    scores[sibling] = _sibling_value(
                        scenario, users, satisfied, sibling, star
                    )
            considered.add(star)
            for req in users:
                if thresholds_met(scenario, req.user_id, star):
                    satisfied.add(req.user_id)
            if (
                remaining == 0
                or len(satisfied) == len(users)
                or len(considered) == len(scores)
            ):
                break
    return _report(scenario, Algorithm.EGP, triples, started)


# ---------------------------------------------------------------------------
# Baselines


def _edge_knapsack(
    weights: Sequence[int], values: Sequence[float], capacity: int
) -> list[int]:
    """0/1 knapsack over integer weights; returns chosen item indexes.

    Ties prefer leaving an item out, which keeps the choice deterministic.
    """
    n = len(weights)
    best = [0.0] * (capacity + 1)
    take = [[False] * (capacity + 1) for _ in range(n)]
    for i in range(n):
        w, v = weights[i], values[i]
        row = take[i]
        for budget in range(capacity, w - 1, -1):
            candidate = best[budget - w] + v
            if candidate > best[budget]:
                best[budget] = candidate
                row[budget] = True
    chosen = []
    budget = capacity
    for i in range(n - 1, -1, -1):
        if take[i][budget]:
            chosen.append(i)
            budget -= weights[i]
    chosen.reverse()
    return chosen


def sck(scenario: Scenario) -> SolveReport:
    """Knapsack baseline.

    Per edge, solve a 0/1 knapsack where items are the candidate models,
    weights their storage costs, and each item's value the total value it
    would give all covered requesters of its service. Redundant siblings
    of one service double-count users, which is exactly this baseline's
    blind spot. Scheduling is optimal given the chosen placement.
    """
    started = time.perf_counter()
    triples: set[tuple[int, int, int]] = set()
    for edge in scenario.edges:
        users = scenario.users_at(edge.edge_id)
        if not users:
            continue
        items = _candidate_models(scenario, edge.edge_id)
        weights = [scenario.model(*key).storage_cost for key in items]
        values = [
            math.fsum(
                assignment_value(scenario, req.user_id, key)
                for req in users
                if req.requested_service == key[0]
            )
            for key in items
        ]
        for i in _edge_knapsack(weights, values, edge.storage_capacity):
            s, m = items[i]
            triples.add((edge.edge_id, s, m))
    return _report(scenario, Algorithm.SCK, triples, started)


def rnd(scenario: Scenario, seed: int) -> SolveReport:
    """Random placement and scheduling baseline, deterministic per seed.

    Per edge, walk a uniform shuffle of the whole model catalog and place
    everything that still fits. Each user is then served by a uniformly
    random placed implementation of their service, if any.
    """
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    all_models = scenario.model_keys()
    triples: set[tuple[int, int, int]] = set()
    for edge in scenario.edges:
        remaining = edge.storage_capacity
        for idx in rng.permutation(len(all_models)):
            s, m = all_models[int(idx)]
            cost = scenario.model(s, m).storage_cost
            if cost <= remaining:
                triples.add((edge.edge_id, s, m))
                remaining -= cost
    placement = Placement.from_triples(triples)
    assigned: dict[int, int] = {}
    for req in scenario.requests:
        options = placement.models_at(req.covering_edge, req.requested_service)
        if options:
            assigned[req.user_id] = options[int(rng.integers(len(options)))]
    return _report(scenario, Algorithm.RND, triples, started, schedule=Schedule(assigned))


def solve(
    scenario: Scenario,
    algorithm: Algorithm,
    seed: int = 0,
    exact_cap: int = DEFAULT_EXACT_CAP,
) -> SolveReport:
    """Run one solver by name. `seed` only matters for the random baseline."""
    if algorithm is Algorithm.EXACT:
        return exact(scenario, max_models_per_edge=exact_cap)
    if algorithm is Algorithm.AGP:
        return agp(scenario)
    if algorithm is Algorithm.EGP:
        return egp(scenario)
    if algorithm is Algorithm.SCK:
        return sck(scenario)
    if algorithm is Algorithm.RND:
        return rnd(scenario, seed)
    raise ValueError(f"unknown algorithm: {algorithm}")
