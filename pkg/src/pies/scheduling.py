"""Model scheduling given a placement, and the set-function view of it.

Scheduling decomposes per user: each user is served by whichever placed
implementation of their requested service gives them the most value.
That greedy choice is provably optimal, and the spanning-tree oracle in
this module realises the equivalence used to prove it, so the two can be
cross-checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable

from .model import ModelKey, Placement, Scenario, Schedule, assignment_value

PlacedPair = tuple[int, ModelKey]  # (edge_id, (service_id, model_id))


def oms(scenario: Scenario, placement: Placement) -> Schedule:
    """Optimal model scheduling.

    Every user with at least one placed implementation of their requested
    service on their covering edge gets the implementation of greatest
    value; everyone else stays unserved. Ties go to the lowest model id.
    """
    assigned: dict[int, int] = {}
    for req in scenario.requests:
        best_model = None
        best_value = -1.0
        for model_id in placement.models_at(req.covering_edge, req.requested_service):
            value = assignment_value(
                scenario, req.user_id, (req.requested_service, model_id)
            )
            if value > best_value:
                best_model, best_value = model_id, value
        if best_model is not None:
            assigned[req.user_id] = best_model
    return Schedule(assigned)


def sigma_u(scenario: Scenario, user_id: int, placed: Iterable[PlacedPair]) -> float:
    """Best value any placed implementation gives the user, or 0.

    Defined on arbitrary subsets of edge x model pairs; storage
    feasibility is not required.
    """
    req = scenario.request(user_id)
    best = 0.0
    for edge_id, model_key in placed:
        if edge_id == req.covering_edge and model_key[0] == req.requested_service:
            value = assignment_value(scenario, user_id, model_key)
            if value > best:
                best = value
    return best


def sigma(scenario: Scenario, placed: Iterable[PlacedPair]) -> float:
    """Objective value of a placement set under optimal scheduling."""
    by_edge_service: dict[tuple[int, int], list[ModelKey]] = {}
    for edge_id, model_key in placed:
        by_edge_service.setdefault((edge_id, model_key[0]), []).append(model_key)
    terms = []
    for req in scenario.requests:
        candidates = by_edge_service.get((req.covering_edge, req.requested_service))
        if not candidates:
            continue
        best = 0.0
        for model_key in candidates:
            value = assignment_value(scenario, req.user_id, model_key)
            if value > best:
                best = value
        terms.append(best)
    return math.fsum(terms)


ROOT: Hashable = ("root",)


@dataclass(frozen=True)
class Link:
    """Undirected weighted link of the auxiliary multigraph."""

    a: Hashable
    b: Hashable
    weight: float
    model_id: int | None = None  # set on user-to-service links


@dataclass(frozen=True)
class AuxiliaryMultigraph:
    """Scheduling recast as a graph problem.

    One root node, one node per servable user (a user with at least one
    placed implementation of their service on their covering edge), and
    one service node per such user. The root connects to every user with
    a zero-weight link; each user connects to their service node through
    one parallel link per placed implementation, weighted by the value
    that implementation gives the user.
    """

    user_nodes: tuple[Hashable, ...]
    service_nodes: tuple[Hashable, ...]
    links: tuple[Link, ...]

    def parallel_count(self, user_id: int) -> int:
        node = ("user", user_id)
        return sum(1 for l in self.links if l.a == node and l.model_id is not None)


def build_auxiliary_multigraph(
    scenario: Scenario, placement: Placement
) -> AuxiliaryMultigraph:
    user_nodes = []
    service_nodes = []
    links = []
    for req in scenario.requests:
        models = placement.models_at(req.covering_edge, req.requested_service)
        if not models:
            continue
        u_node = ("user", req.user_id)
        s_node = ("service", req.user_id)  # one service node per servable user
        user_nodes.append(u_node)
        service_nodes.append(s_node)
        links.append(Link(ROOT, u_node, 0.0))
        for model_id in models:
            links.append(
                Link(
                    u_node,
                    s_node,
                    assignment_value(
                        scenario, req.user_id, (req.requested_service, model_id)
                    ),
                    model_id=model_id,
                )
            )
    return AuxiliaryMultigraph(tuple(user_nodes), tuple(service_nodes), tuple(links))


def mst_oracle(scenario: Scenario, placement: Placement) -> float:
    """Optimal scheduling value via a maximum spanning tree.

    Builds the auxiliary multigraph and runs a sort-based greedy spanning
    tree construction on negated weights (equivalently, heaviest link
    first), returning the total weight of chosen user-to-service links.
    Cross-validates :func:`oms`: both must agree exactly.
    """
    graph = build_auxiliary_multigraph(scenario, placement)

    parent: dict[Hashable, Hashable] = {ROOT: ROOT}
    for node in graph.user_nodes + graph.service_nodes:
        parent[node] = node

    def find(node: Hashable) -> Hashable:
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    def union(a: Hashable, b: Hashable) -> bool:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[rb] = ra
        return True

    # Negating weights turns the minimum-tree greedy into a maximum one;
    # the sort key keeps the pass deterministic across equal weights.
    ordered = sorted(
        enumerate(graph.links), key=lambda item: (-item[1].weight, item[0])
    )
    chosen = []
    for _, link in ordered:
        if union(link.a, link.b) and link.model_id is not None:
            chosen.append(link.weight)
    return math.fsum(chosen)
