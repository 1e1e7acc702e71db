"""Neural-network service models: full, pruned, and split variants.

A sequential network is described by a neuron count and a per-neuron
cycle count for every layer. From a full network (DNN) two cheaper
implementations are derived: a pruned one (PNN) that shrinks layers and
drops hidden layers at a fixed rate, and a split one (SNN) whose first
layers run on the edge while the remainder runs in the central cloud.
Serving a user through an SNN is discounted by a penalty for relying on
the cloud.

When a scenario carries ann data, request delays come from these
architectures (link rate from distance, computation from the layer/cycle
dot product) instead of the scalar cost/capacity ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .model import (
    EdgeCloud,
    ModelKey,
    Scenario,
    Schedule,
    Service,
    ServiceModelSpec,
    UserRequest,
    qos,
)

DNN_MODEL_ID = 1
PNN_MODEL_ID = 2
SNN_MODEL_ID = 3


class AnnModelType(Enum):
    DNN = "dnn"
    PNN = "pnn"
    SNN = "snn"


class UnreachableUserError(ValueError):
    """User sits at the coverage boundary; their link rate is zero."""


@dataclass(frozen=True)
class AnnArchitecture:
    """A sequential network: neurons per layer and cycles per neuron.

    Both vectors must have the same length, at least two layers (input
    and output), and strictly positive integer entries.
    """

    layer_neurons: tuple[int, ...]
    layer_cycles: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "layer_neurons", tuple(self.layer_neurons))
        object.__setattr__(self, "layer_cycles", tuple(self.layer_cycles))
        if len(self.layer_neurons) != len(self.layer_cycles):
            raise ValueError("layer_neurons and layer_cycles must be equally long")
        if len(self.layer_neurons) < 2:
            raise ValueError("a network needs at least input and output layers")
        for v in self.layer_neurons + self.layer_cycles:
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"layer entries must be positive integers, got {v!r}")

    @property
    def num_layers(self) -> int:
        return len(self.layer_neurons)


@dataclass(frozen=True)
class AnnHyperparams:
    """Derivation and penalty knobs for the network variants."""

    gamma: float = 0.75  # pruning rate applied to layers and neurons
    rho: float = 0.5  # fraction of a split network resident on the edge
    lambda_pnn: float = 0.75  # accuracy decay exponent for pruned networks
    lambda_snn: float = 0.125  # accuracy decay exponent for split networks
    theta: float = 0.05  # value penalty for serving through a split network
    prune_output_layer: bool = False  # when True, pruning shrinks the output layer too

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be strictly inside (0, 1)")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must be strictly inside (0, 1)")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must be within [0, 1]")


@dataclass(frozen=True)
class AnnUserLink:
    """Radio link parameters between a user and their edge cloud."""

    distance: float
    distance_max: float
    cloud_bps: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.distance <= self.distance_max:
            raise ValueError(
                f"distance {self.distance} outside [0, {self.distance_max}]"
            )


@dataclass(frozen=True)
class AnnModel:
    """One network implementation: its kind, architecture and split point."""

    kind: AnnModelType
    architecture: AnnArchitecture
    split_index: int | None = None  # SNN only: layers 1..split_index run on the edge

    def __post_init__(self) -> None:
        if self.kind is AnnModelType.SNN:
            if self.split_index is None:
                raise ValueError("split networks need a split_index")
            if not 1 <= self.split_index <= self.architecture.num_layers:
                raise ValueError(f"split_index {self.split_index} out of range")
        elif self.split_index is not None:
            raise ValueError("only split networks carry a split_index")


def derive_pnn(
    dnn: AnnArchitecture,
    dnn_storage: int,
    dnn_accuracy: float,
    params: AnnHyperparams,
    seed: int,
) -> tuple[AnnArchitecture, int, float]:
    """Prune a full network at rate gamma.

    Keeps ceil(gamma * hidden) hidden layers, chosen uniformly at random
    (cycles removed in lockstep), and shrinks every kept layer's neuron
    count to ceil(gamma * neurons). The output layer is left at full
    width unless `params.prune_output_layer` is set. Storage shrinks to
    ceil(gamma * storage); accuracy decays by gamma ** lambda_pnn.
    """
    rng = np.random.default_rng(seed)
    n = dnn.num_layers
    hidden = list(range(1, n - 1))
    keep_count = math.ceil(params.gamma * (n - 2))
    kept_hidden = sorted(
        int(i) for i in rng.choice(hidden, size=keep_count, replace=False)
    ) if hidden else []
    kept = [0] + kept_hidden + [n - 1]

    neurons = []
    cycles = []
    for i in kept:
        width = dnn.layer_neurons[i]
        if i != n - 1 or params.prune_output_layer:
            width = math.ceil(params.gamma * width)
        neurons.append(width)
        cycles.append(dnn.layer_cycles[i])
    arch = AnnArchitecture(tuple(neurons), tuple(cycles))
    storage = math.ceil(params.gamma * dnn_storage)
    accuracy = params.gamma**params.lambda_pnn * dnn_accuracy
    return arch, storage, accuracy


def derive_snn(
    dnn: AnnArchitecture,
    dnn_storage: int,
    dnn_accuracy: float,
    params: AnnHyperparams,
) -> tuple[AnnModel, int, float]:
    """Split a full network at fraction rho.

    The architecture is kept whole; the first ceil(rho * layers) layers
    run on the edge and the rest in the cloud. Storage shrinks to
    ceil(rho * storage); accuracy decays by rho ** lambda_snn.
    """
    split = math.ceil(params.rho * dnn.num_layers)
    model = AnnModel(AnnModelType.SNN, dnn, split_index=split)
    storage = math.ceil(params.rho * dnn_storage)
    accuracy = params.rho**params.lambda_snn * dnn_accuracy
    return model, storage, accuracy


def user_bps(
    comm_capacity: float, covered_count: int, link: AnnUserLink
) -> float:
    """Two-way link rate of a user, Shannon-Hartley style.

    The user's even share of the edge's communication capacity, scaled by
    a log term that falls from 1 at the edge cloud to 0 at the coverage
    boundary.
    """
    if covered_count < 1:
        raise ValueError("covered_count must be >= 1")
    ratio = (link.distance_max - link.distance) / link.distance_max
    return comm_capacity / covered_count * math.log2(1.0 + ratio)


def ann_comm_delay(
    model: AnnModel, link: AnnUserLink, bps_u: float, covered_count: int
) -> float:
    """Seconds spent moving data for one request, one bit per neuron.

    Input and output layers travel between user and edge. Split networks
    additionally ship the edge-side boundary layer to the cloud and the
    output back, over an even share of the edge-to-cloud rate.
    """
    if bps_u <= 0.0:
        raise UnreachableUserError(
            "user link rate is zero (user at the coverage boundary)"
        )
    neurons = model.architecture.layer_neurons
    delay = (neurons[0] + neurons[-1]) / bps_u
    if model.kind is AnnModelType.SNN:
        share = link.cloud_bps / covered_count
        delay += (neurons[model.split_index - 1] + neurons[-1]) / share
    return delay


def ann_comp_delay(
    model: AnnModel, comp_capacity: float, covered_count: int
) -> float:
    """Seconds of computation for one request on the user's capacity share.

    Cycle count is the dot product of neurons and per-neuron cycles; for a
    split network only the edge-resident layers count (cloud computation
    is treated as free).
    """
    arch = model.architecture
    layers = (
        model.split_index if model.kind is AnnModelType.SNN else arch.num_layers
    )
    cycles = sum(
        arch.layer_neurons[i] * arch.layer_cycles[i] for i in range(layers)
    )
    return cycles / (comp_capacity / covered_count)


@dataclass(frozen=True)
class AnnData:
    """Per-scenario payload wiring network models into the QoS math."""

    params: AnnHyperparams
    dist_max: float
    cloud_bps: float
    models: Mapping[ModelKey, AnnModel]
    distances: Mapping[int, float]  # user_id -> distance from covering edge

    def __post_init__(self) -> None:
        if self.dist_max <= 0 or self.cloud_bps <= 0:
            raise ValueError("dist_max and cloud_bps must be positive")
        object.__setattr__(self, "models", dict(self.models))
        object.__setattr__(self, "distances", dict(self.distances))

    def link_for(self, user_id: int) -> AnnUserLink:
        return AnnUserLink(self.distances[user_id], self.dist_max, self.cloud_bps)

    def expected_delay(
        self, scenario: Scenario, user_id: int, model_key: ModelKey
    ) -> float:
        req = scenario.request(user_id)
        edge = scenario.edge(req.covering_edge)
        share = scenario.covered_count(req.covering_edge)
        model = self.models[model_key]
        link = self.link_for(user_id)
        bps = user_bps(edge.comm_capacity, share, link)
        return ann_comm_delay(model, link, bps, share) + ann_comp_delay(
            model, edge.comp_capacity, share
        )

    def penalty_factor(self, model_key: ModelKey) -> float:
        if self.models[model_key].kind is AnnModelType.SNN:
            return 1.0 - self.params.theta
        return 1.0


def is_snn(scenario: Scenario, model_key: ModelKey) -> bool:
    return (
        scenario.ann is not None
        and scenario.ann.models[model_key].kind is AnnModelType.SNN
    )


def ann_objective(scenario: Scenario, schedule: Schedule, theta: float) -> float:
    """Total QoS with every split-network assignment discounted by theta.

    With theta zero this reduces exactly to the plain objective.
    """
    terms = []
    for user_id, model_id in schedule.assigned.items():
        req = scenario.request(user_id)
        key = (req.requested_service, model_id)
        value = qos(scenario, user_id, key)
        if is_snn(scenario, key):
            value -= theta * value
        terms.append(value)
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# Scenario builder


@dataclass(frozen=True)
class AnnGenParams:
    """Knobs for sampling network-mode scenarios.

    Every service gets exactly three implementations: the sampled full
    network plus its pruned and split derivations.
    """

    num_users: int
    num_edges: int = 3
    num_services: int = 5
    layer_count_range: tuple[int, int] = (3, 8)
    neurons_range: tuple[int, int] = (4, 32)
    cycles_range: tuple[int, int] = (1, 4)
    dnn_storage_range: tuple[int, int] = (10, 20)
    dnn_accuracy_mean: float = 0.9
    dnn_accuracy_sd: float = 0.05
    comm_capacity_range: tuple[int, int] = (300, 600)
    comp_capacity_range: tuple[int, int] = (3000, 6000)
    storage_capacity_range: tuple[int, int] = (30, 60)
    alpha_exp_param: float = 0.125
    delta_exp_param: float = 1.5
    delay_max: float = 10.0
    dist_max: float = 100.0
    cloud_bps: float = 5000.0
    hyper: AnnHyperparams = field(default_factory=AnnHyperparams)

    def __post_init__(self) -> None:
        if self.num_users < 0:
            raise ValueError("num_users must be >= 0")
        if self.layer_count_range[0] < 2:
            raise ValueError("networks need at least two layers")


def ann_scenario(params: AnnGenParams, seed: int) -> Scenario:
    """Sample a scenario whose services are DNN/PNN/SNN triples."""
    rng = np.random.default_rng(seed)

    def uniform_int(bounds: tuple[int, int]) -> int:
        return int(rng.integers(bounds[0], bounds[1], endpoint=True))

    edges = tuple(
        EdgeCloud(
            edge_id=e,
            comm_capacity=uniform_int(params.comm_capacity_range),
            comp_capacity=uniform_int(params.comp_capacity_range),
            storage_capacity=uniform_int(params.storage_capacity_range),
        )
        for e in range(1, params.num_edges + 1)
    )

    services = []
    ann_models: dict[ModelKey, AnnModel] = {}
    for s in range(1, params.num_services + 1):
        layers = uniform_int(params.layer_count_range)
        dnn_arch = AnnArchitecture(
            tuple(uniform_int(params.neurons_range) for _ in range(layers)),
            tuple(uniform_int(params.cycles_range) for _ in range(layers)),
        )
        dnn_storage = uniform_int(params.dnn_storage_range)
        dnn_accuracy = float(
            np.clip(
                rng.normal(params.dnn_accuracy_mean, params.dnn_accuracy_sd), 0.0, 1.0
            )
        )
        prune_seed = int(rng.integers(0, 2**63 - 1))
        pnn_arch, pnn_storage, pnn_accuracy = derive_pnn(
            dnn_arch, dnn_storage, dnn_accuracy, params.hyper, prune_seed
        )
        snn_model, snn_storage, snn_accuracy = derive_snn(
            dnn_arch, dnn_storage, dnn_accuracy, params.hyper
        )

        # Scalar comm/comp costs are placeholders here; delays come from
        # the architectures whenever ann data is attached.
        specs = (
            ServiceModelSpec(s, DNN_MODEL_ID, dnn_accuracy, 1.0, 1.0, dnn_storage),
            ServiceModelSpec(s, PNN_MODEL_ID, pnn_accuracy, 1.0, 1.0, pnn_storage),
            ServiceModelSpec(s, SNN_MODEL_ID, snn_accuracy, 1.0, 1.0, snn_storage),
        )
        services.append(Service(service_id=s, models=specs))
        ann_models[(s, DNN_MODEL_ID)] = AnnModel(AnnModelType.DNN, dnn_arch)
        ann_models[(s, PNN_MODEL_ID)] = AnnModel(AnnModelType.PNN, pnn_arch)
        ann_models[(s, SNN_MODEL_ID)] = snn_model

    requests = []
    distances: dict[int, float] = {}
    for u in range(1, params.num_users + 1):
        edge_id = int(rng.integers(1, params.num_edges + 1))
        service_id = int(rng.integers(1, params.num_services + 1))
        eps = float(np.clip(rng.exponential(1.0 / params.alpha_exp_param), 0.0, 1.0))
        delta = float(
            np.clip(rng.exponential(1.0 / params.delta_exp_param), 0.0, params.delay_max)
        )
        requests.append(
            UserRequest(
                user_id=u,
                covering_edge=edge_id,
                requested_service=service_id,
                accuracy_threshold=1.0 - eps,
                delay_threshold=delta,
            )
        )
        distances[u] = float(rng.uniform(0.0, params.dist_max))

    data = AnnData(
        params=params.hyper,
        dist_max=params.dist_max,
        cloud_bps=params.cloud_bps,
        models=ann_models,
        distances=distances,
    )
    meta = {"seed": int(seed), "generator": "pies-ann-gen-1 (numpy PCG64)"}
    return Scenario(
        edges=edges,
        services=tuple(services),
        requests=tuple(requests),
        delay_max=params.delay_max,
        ann=data,
        meta=meta,
    )
