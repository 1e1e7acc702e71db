"""Problem model for multi-implementation edge service placement.

Edge clouds cover disjoint sets of user requests. Every service ships one
or more implementations ("service models") that trade accuracy against
resource cost. The QoS a model delivers to a user blends how well the
model meets the user's accuracy threshold with how well the expected
request delay meets the user's delay threshold; both satisfaction terms
live in [0, 1] and so does their mean.

All types are immutable after construction and all operations are pure,
so everything here is safe to use concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping, Optional

if TYPE_CHECKING:  # pragma: no cover
    from .ann import AnnData

# (service_id, model_id) pair identifying one concrete implementation.
ModelKey = tuple[int, int]


@dataclass(frozen=True)
class ServiceModelSpec:
    """One concrete implementation of a service.

    Attributes:
        service_id: Service this model implements.
        model_id: Identifier of the implementation within the service.
        accuracy: Evaluated accuracy metric, in [0, 1].
        comm_cost: Data units transferred per request (positive).
        comp_cost: Compute units consumed per request (positive).
        storage_cost: Storage units needed to host the model
            (non-negative integer, so storage feasibility stays exact).
    """

    service_id: int
    model_id: int
    accuracy: float
    comm_cost: float
    comp_cost: float
    storage_cost: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"model accuracy outside [0, 1]: {self.accuracy}")
        if self.comm_cost <= 0 or self.comp_cost <= 0:
            raise ValueError("comm_cost and comp_cost must be positive")
        if not isinstance(self.storage_cost, int):
            raise ValueError(f"storage_cost must be an integer, got {self.storage_cost!r}")
        if self.storage_cost < 0:
            raise ValueError("storage_cost must be non-negative")

    @property
    def key(self) -> ModelKey:
        return (self.service_id, self.model_id)


@dataclass(frozen=True)
class EdgeCloud:
    """A compute node with communication, computation and storage capacity.

    Capacities are shared evenly across all requests the edge covers.
    """

    edge_id: int
    comm_capacity: float
    comp_capacity: float
    storage_capacity: int

    def __post_init__(self) -> None:
        if self.comm_capacity <= 0 or self.comp_capacity <= 0:
            raise ValueError("comm_capacity and comp_capacity must be positive")
        if not isinstance(self.storage_capacity, int):
            raise ValueError(
                f"storage_capacity must be an integer, got {self.storage_capacity!r}"
            )
        if self.storage_capacity < 0:
            raise ValueError("storage_capacity must be non-negative")


@dataclass(frozen=True)
class UserRequest:
    """A single service request with accuracy and delay thresholds."""

    user_id: int
    covering_edge: int
    requested_service: int
    accuracy_threshold: float
    delay_threshold: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy_threshold <= 1.0:
            raise ValueError(
                f"accuracy_threshold outside [0, 1]: {self.accuracy_threshold}"
            )
        if self.delay_threshold < 0:
            raise ValueError("delay_threshold must be non-negative")


@dataclass(frozen=True)
class Service:
    """A service together with its implemented models (at least one)."""

    service_id: int
    models: tuple[ServiceModelSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", tuple(self.models))
        if not self.models:
            raise ValueError(f"service {self.service_id} has no models")
        ids = [m.model_id for m in self.models]
        if len(set(ids)) != len(ids):
            raise ValueError(f"service {self.service_id} has duplicate model ids")
        for m in self.models:
            if m.service_id != self.service_id:
                raise ValueError(
                    f"model {m.model_id} declares service {m.service_id}, "
                    f"expected {self.service_id}"
                )


@dataclass(frozen=True)
class Scenario:
    """A full problem instance.

    Attributes:
        edges: Edge clouds, unique ids.
        services: Service catalog, unique ids, each with >= 1 model.
        requests: User requests; each references an existing edge/service
            and has its delay threshold within [0, delay_max].
        delay_max: Largest possible delay in seconds (> 0); normalises the
            delay satisfaction term.
        ann: Optional neural-network extension payload. When present, the
            delay term of the QoS is computed from the per-model network
            architectures instead of the scalar cost/capacity ratios, and
            solver-facing values carry the split-model penalty.
        meta: Optional free-form provenance (seed, generator version, ...).
    """

    edges: tuple[EdgeCloud, ...]
    services: tuple[Service, ...]
    requests: tuple[UserRequest, ...]
    delay_max: float
    ann: Optional["AnnData"] = None
    meta: Optional[dict] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "services", tuple(self.services))
        object.__setattr__(self, "requests", tuple(self.requests))
        if self.delay_max <= 0:
            raise ValueError("delay_max must be positive")
        edge_ids = [e.edge_id for e in self.edges]
        if len(set(edge_ids)) != len(edge_ids):
            raise ValueError("duplicate edge ids")
        service_ids = [s.service_id for s in self.services]
        if len(set(service_ids)) != len(service_ids):
            raise ValueError("duplicate service ids")
        user_ids = [r.user_id for r in self.requests]
        if len(set(user_ids)) != len(user_ids):
            raise ValueError("duplicate user ids")
        edges = set(edge_ids)
        services = set(service_ids)
        for req in self.requests:
            if req.covering_edge not in edges:
                raise ValueError(
                    f"user {req.user_id} covered by unknown edge {req.covering_edge}"
                )
            if req.requested_service not in services:
                raise ValueError(
                    f"user {req.user_id} requests unknown service {req.requested_service}"
                )
            if req.delay_threshold > self.delay_max:
                raise ValueError(
                    f"user {req.user_id} delay threshold {req.delay_threshold} "
                    f"exceeds delay_max {self.delay_max}"
                )

    # Lookup helpers. The indexes are built lazily and cached; racing
    # builds from multiple threads just recompute identical values.

    @cached_property
    def _edge_by_id(self) -> dict[int, EdgeCloud]:
        return {e.edge_id: e for e in self.edges}

    @cached_property
    def _service_by_id(self) -> dict[int, Service]:
        return {s.service_id: s for s in self.services}

    @cached_property
    def _model_by_key(self) -> dict[ModelKey, ServiceModelSpec]:
        return {m.key: m for s in self.services for m in s.models}

    @cached_property
    def _request_by_id(self) -> dict[int, UserRequest]:
        return {r.user_id: r for r in self.requests}

    @cached_property
    def _users_by_edge(self) -> dict[int, tuple[UserRequest, ...]]:
        grouped: dict[int, list[UserRequest]] = {e.edge_id: [] for e in self.edges}
        for req in self.requests:
            grouped[req.covering_edge].append(req)
        return {eid: tuple(reqs) for eid, reqs in grouped.items()}

    @cached_property
    def _value_cache(self) -> dict[tuple[int, ModelKey], float]:
        return {}

    def edge(self, edge_id: int) -> EdgeCloud:
        return self._edge_by_id[edge_id]

    def service(self, service_id: int) -> Service:
        return self._service_by_id[service_id]

    def model(self, service_id: int, model_id: int) -> ServiceModelSpec:
        return self._model_by_key[(service_id, model_id)]

    def request(self, user_id: int) -> UserRequest:
        return self._request_by_id[user_id]

    def users_at(self, edge_id: int) -> tuple[UserRequest, ...]:
        return self._users_by_edge[edge_id]

    def covered_count(self, edge_id: int) -> int:
        """Number of requests the edge covers, placement-independent."""
        return len(self._users_by_edge[edge_id])

    def model_keys(self) -> tuple[ModelKey, ...]:
        """All (service_id, model_id) pairs, sorted."""
        return tuple(sorted(self._model_by_key))

    @property
    def num_users(self) -> int:
        return len(self.requests)


@dataclass(frozen=True)
class Placement:
    """Which service models are hosted where.

    A set of (edge_id, service_id, model_id) triples. Storage feasibility
    is not enforced at construction; :func:`validate` reports overflows.
    """

    placed: frozenset[tuple[int, int, int]]

    def __post_init__(self) -> None:
        object.__setattr__(self, "placed", frozenset(self.placed))

    @classmethod
    def from_triples(cls, triples: Iterable[tuple[int, int, int]]) -> "Placement":
        return cls(frozenset(triples))

    @classmethod
    def empty(cls) -> "Placement":
        return cls(frozenset())

    @cached_property
    def _models_by_edge_service(self) -> dict[tuple[int, int], tuple[int, ...]]:
        grouped: dict[tuple[int, int], list[int]] = {}
        for e, s, m in self.placed:
            grouped.setdefault((e, s), []).append(m)
        return {k: tuple(sorted(v)) for k, v in grouped.items()}

    def models_at(self, edge_id: int, service_id: int) -> tuple[int, ...]:
        """Model ids of `service_id` hosted on `edge_id`, ascending."""
        return self._models_by_edge_service.get((edge_id, service_id), ())

    def pairs(self) -> set[tuple[int, ModelKey]]:
        """The placement as a set of (edge, (service, model)) pairs."""
        return {(e, (s, m)) for e, s, m in self.placed}

    def __len__(self) -> int:
        return len(self.placed)


@dataclass(frozen=True)
class Schedule:
    """Which placed model serves each user.

    Maps user_id to the model_id of the user's requested service. Users
    absent from the map are unserved. The map representation makes the
    one-model-per-user rule structural: it cannot be violated.
    """

    assigned: Mapping[int, int]

    def __post_init__(self) -> None:
        cleaned = {u: m for u, m in dict(self.assigned).items() if m is not None}
        object.__setattr__(self, "assigned", cleaned)

    @classmethod
    def empty(cls) -> "Schedule":
        return cls({})

    def model_for(self, user_id: int) -> Optional[int]:
        return self.assigned.get(user_id)

    def __len__(self) -> int:
        return len(self.assigned)


class Constraint(Enum):
    """Feasibility rules checked by :func:`validate`."""

    STORAGE_CAPACITY = "storage-capacity"
    PLACEMENT_COVERAGE = "placement-coverage"
    REFERENCE = "reference"


@dataclass(frozen=True)
class Violation:
    """One violated feasibility rule, pointing at the responsible entity."""

    constraint: Constraint
    edge_id: Optional[int] = None
    user_id: Optional[int] = None
    detail: str = ""


def accuracy_satisfaction(accuracy: float, threshold: float) -> float:
    """How well an accuracy value meets a user threshold, in [0, 1].

    Full satisfaction when the threshold is met, otherwise satisfaction
    falls off linearly with the accuracy shortfall (floored at 0).
    """
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError(f"accuracy outside [0, 1]: {accuracy}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold outside [0, 1]: {threshold}")
    if accuracy >= threshold:
        return 1.0
    return max(0.0, 1.0 - (threshold - accuracy))


def delay_satisfaction(delay: float, threshold: float, delay_max: float) -> float:
    """How well an expected delay meets a user threshold, in [0, 1].

    Full satisfaction within the threshold, otherwise the excess delay is
    normalised by `delay_max` and subtracted (floored at 0).
    """
    if delay_max <= 0:
        raise ValueError(f"delay_max must be positive, got {delay_max}")
    if delay <= threshold:
        return 1.0
    return max(0.0, 1.0 - (delay - threshold) / delay_max)


def expected_delay(scenario: Scenario, user_id: int, model_key: ModelKey) -> float:
    """Expected seconds to serve the user's request with the given model.

    Transmission plus computation time, with the covering edge's capacity
    split evenly across every request it covers (all covered requests
    count, whether or not they end up served).
    """
    if scenario.ann is not None:
        return scenario.ann.expected_delay(scenario, user_id, model_key)
    req = scenario.request(user_id)
    spec = scenario.model(*model_key)
    edge = scenario.edge(req.covering_edge)
    share = scenario.covered_count(req.covering_edge)
    return (
        spec.comm_cost * share / edge.comm_capacity
        + spec.comp_cost * share / edge.comp_capacity
    )


def qos(scenario: Scenario, user_id: int, model_key: ModelKey) -> float:
    """Expected QoS the model delivers to the user, in [0, 1].

    Zero for models of a service the user did not request, otherwise the
    mean of the accuracy and delay satisfaction terms.
    """
    req = scenario.request(user_id)
    if model_key[0] != req.requested_service:
        return 0.0
    spec = scenario.model(*model_key)
    acc = accuracy_satisfaction(spec.accuracy, req.accuracy_threshold)
    dly = delay_satisfaction(
        expected_delay(scenario, user_id, model_key),
        req.delay_threshold,
        scenario.delay_max,
    )
    return 0.5 * (acc + dly)


def thresholds_met(scenario: Scenario, user_id: int, model_key: ModelKey) -> bool:
    """True when the model meets both of the user's thresholds.

    This is the exact condition under which the QoS equals one, and is
    the test to use instead of floating-point comparison with 1.0.
    """
    req = scenario.request(user_id)
    if model_key[0] != req.requested_service:
        return False
    spec = scenario.model(*model_key)
    return (
        spec.accuracy >= req.accuracy_threshold
        and expected_delay(scenario, user_id, model_key) <= req.delay_threshold
    )


def assignment_value(scenario: Scenario, user_id: int, model_key: ModelKey) -> float:
    """The per-assignment value solvers maximise.

    Equals the QoS for plain scenarios. For neural-network scenarios the
    split-model penalty is folded in, so every solver optimises the
    penalised objective without special-casing.
    """
    cache = scenario._value_cache
    key = (user_id, model_key)
    cached = cache.get(key)
    if cached is not None:
        return cached
    value = qos(scenario, user_id, model_key)
    if scenario.ann is not None:
        value *= scenario.ann.penalty_factor(model_key)
    cache[key] = value
    return value


def objective_value(scenario: Scenario, schedule: Schedule) -> float:
    """Total expected QoS of a schedule. Unserved users contribute 0."""
    terms = []
    for user_id, model_id in schedule.assigned.items():
        req = scenario.request(user_id)
        terms.append(qos(scenario, user_id, (req.requested_service, model_id)))
    return math.fsum(terms)


def validate(
    scenario: Scenario, placement: Placement, schedule: Schedule
) -> list[Violation]:
    """Check placement/schedule feasibility; an empty list means ok.

    Reports every violated rule: per-edge storage capacity, users served
    by a model their covering edge does not host, and dangling ids. The
    one-model-per-user rule is structural in :class:`Schedule` and cannot
    be violated.
    """
    violations: list[Violation] = []

    used: dict[int, int] = {e.edge_id: 0 for e in scenario.edges}
    for e, s, m in placement.placed:
        if e not in scenario._edge_by_id:
            violations.append(
                Violation(Constraint.REFERENCE, edge_id=e, detail=f"unknown edge {e}")
            )
            continue
        spec = scenario._model_by_key.get((s, m))
        if spec is None:
            violations.append(
                Violation(
                    Constraint.REFERENCE,
                    edge_id=e,
                    detail=f"unknown service model ({s}, {m})",
                )
            )
            continue
        used[e] += spec.storage_cost
    for edge in scenario.edges:
        if used[edge.edge_id] > edge.storage_capacity:
            violations.append(
                Violation(
                    Constraint.STORAGE_CAPACITY,
                    edge_id=edge.edge_id,
                    detail=(
                        f"storage used {used[edge.edge_id]} exceeds "
                        f"capacity {edge.storage_capacity}"
                    ),
                )
            )

    for user_id, model_id in schedule.assigned.items():
        req = scenario._request_by_id.get(user_id)
        if req is None:
            violations.append(
                Violation(
                    Constraint.REFERENCE, user_id=user_id, detail=f"unknown user {user_id}"
                )
            )
            continue
        triple = (req.covering_edge, req.requested_service, model_id)
        if triple not in placement.placed:
            violations.append(
                Violation(
                    Constraint.PLACEMENT_COVERAGE,
                    user_id=user_id,
                    detail=(
                        f"user {user_id} scheduled on model {model_id} of service "
                        f"{req.requested_service}, not placed on edge {req.covering_edge}"
                    ),
                )
            )
    return violations
