"""Synthetic scenario generation and the image-classification fixture.

Sampling is deterministic for a fixed (params, seed) pair. Generated
scenarios record the seed, generator version and exponential-parameter
mode in their metadata so any instance can be rebuilt from its file.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import EdgeCloud, Scenario, Service, ServiceModelSpec, UserRequest

GENERATOR_VERSION = "pies-gen-1 (numpy PCG64)"


class ExpParamMode(Enum):
    """How exponential parameters are interpreted when sampling."""

    RATE = "rate"  # parameter is the rate, mean = 1 / parameter
    SCALE = "scale"  # parameter is the scale, mean = parameter


def _exp_scale(param: float, mode: ExpParamMode) -> float:
    return 1.0 / param if mode is ExpParamMode.RATE else param


@dataclass(frozen=True)
class GenParams:
    """Knobs for synthetic scenario sampling.

    Capacities and costs are integer uniform over inclusive ranges; model
    accuracy is Gaussian clipped to [0, 1]. Accuracy thresholds are one
    minus a clipped exponential; delay thresholds are a clipped
    exponential. Both exponential parameters follow `exp_param_mode`.
    """

    num_users: int
    num_edges: int = 10
    num_services: int = 100
    models_per_service_range: tuple[int, int] = (1, 10)
    comm_capacity_range: tuple[int, int] = (300, 600)
    comp_capacity_range: tuple[int, int] = (300, 600)
    storage_capacity_range: tuple[int, int] = (100, 200)
    comm_cost_range: tuple[int, int] = (15, 30)
    comp_cost_range: tuple[int, int] = (15, 30)
    storage_cost_range: tuple[int, int] = (10, 20)
    accuracy_mean: float = 0.65
    accuracy_sd: float = 0.1
    alpha_exp_param: float = 0.125
    delta_exp_param: float = 1.5
    delay_max: float = 10.0
    exp_param_mode: ExpParamMode = ExpParamMode.RATE

    def __post_init__(self) -> None:
        if self.num_users < 0:
            raise ValueError("num_users must be >= 0")
        if self.num_edges < 1 or self.num_services < 1:
            raise ValueError("need at least one edge and one service")
        for name in (
            "models_per_service_range",
            "comm_capacity_range",
            "comp_capacity_range",
            "storage_capacity_range",
            "comm_cost_range",
            "comp_cost_range",
            "storage_cost_range",
        ):
            low, high = getattr(self, name)
            if low > high:
                raise ValueError(f"{name} is empty: [{low}, {high}]")
        if self.models_per_service_range[0] < 1:
            raise ValueError("every service needs at least one model")
        if self.delay_max <= 0:
            raise ValueError("delay_max must be positive")
        if self.alpha_exp_param <= 0 or self.delta_exp_param <= 0:
            raise ValueError("exponential parameters must be positive")


def _uniform_int(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1], endpoint=True))


def generate(params: GenParams, seed: int) -> Scenario:
    """Sample a scenario. Identical (params, seed) give identical output."""
    rng = np.random.default_rng(seed)

    edges = [
        EdgeCloud(
            edge_id=e,
            comm_capacity=_uniform_int(rng, params.comm_capacity_range),
            comp_capacity=_uniform_int(rng, params.comp_capacity_range),
            storage_capacity=_uniform_int(rng, params.storage_capacity_range),
        )
        for e in range(1, params.num_edges + 1)
    ]

    services = []
    for s in range(1, params.num_services + 1):
        count = _uniform_int(rng, params.models_per_service_range)
        models = []
        for m in range(1, count + 1):
            accuracy = float(
                np.clip(rng.normal(params.accuracy_mean, params.accuracy_sd), 0.0, 1.0)
            )
            models.append(
                ServiceModelSpec(
                    service_id=s,
                    model_id=m,
                    accuracy=accuracy,
                    comm_cost=_uniform_int(rng, params.comm_cost_range),
                    comp_cost=_uniform_int(rng, params.comp_cost_range),
                    storage_cost=_uniform_int(rng, params.storage_cost_range),
                )
            )
        services.append(Service(service_id=s, models=tuple(models)))

    alpha_scale = _exp_scale(params.alpha_exp_param, params.exp_param_mode)
    delta_scale = _exp_scale(params.delta_exp_param, params.exp_param_mode)
    requests = []
    for u in range(1, params.num_users + 1):
        edge_id = int(rng.integers(1, params.num_edges + 1))
        service_id = int(rng.integers(1, params.num_services + 1))
        eps = float(np.clip(rng.exponential(alpha_scale), 0.0, 1.0))
        delta = float(np.clip(rng.exponential(delta_scale), 0.0, params.delay_max))
        requests.append(
            UserRequest(
                user_id=u,
                covering_edge=edge_id,
                requested_service=service_id,
                accuracy_threshold=1.0 - eps,
                delay_threshold=delta,
            )
        )

    meta = {
        "seed": int(seed),
        "generator": GENERATOR_VERSION,
        "exp_param_mode": params.exp_param_mode.value,
    }
    return Scenario(
        edges=tuple(edges),
        services=tuple(services),
        requests=tuple(requests),
        delay_max=params.delay_max,
        meta=meta,
    )


# ---------------------------------------------------------------------------
# Real-world image-classification fixture

# (name, evaluated accuracy, average per-request computation delay in seconds)
# Catalog ordered by evaluated accuracy, best first; model ids are the
# 1-based positions. Ordering matters: placement value ties break toward
# the lowest model id, so ids must rank models, not alphabetise them.
REAL_WORLD_MODELS: tuple[tuple[str, float, float], ...] = (
    ("densenet", 0.7714, 0.47),
    ("mobilenet", 0.7188, 0.06),
    ("googlenet", 0.6978, 0.13),
    ("resnet", 0.6976, 0.08),
    ("squeezenet", 0.5809, 0.07),
    ("alexnet", 0.5652, 0.04),
)

FIXTURE_DELAY_MAX = 1.0
FIXTURE_ALPHA_RATE = 0.0625
FIXTURE_DELTA_MEAN = 0.5
FIXTURE_DELTA_SD = 0.125


def real_world_fixture(
    seed: int, num_requests: int, transmission_time: float = 0.05
) -> Scenario:
    """One edge cloud hosting a single image-classification service.

    Six measured classifier implementations compete for a single storage
    slot. Capacities are tuned so each model's expected per-request
    computation delay equals its measured average, and every model moves
    the same amount of data, costing `transmission_time` seconds per
    request on top.
    """
    if num_requests < 1:
        raise ValueError("num_requests must be >= 1")
    rng = np.random.default_rng(seed)

    # With capacity equal to the request count, a cost of c units yields
    # an even-share delay of exactly c seconds per request.
    capacity = float(num_requests)
    edge = EdgeCloud(
        edge_id=1,
        comm_capacity=capacity,
        comp_capacity=capacity,
        storage_capacity=1,
    )
    models = tuple(
        ServiceModelSpec(
            service_id=1,
            model_id=m,
            accuracy=accuracy,
            comm_cost=transmission_time,
            comp_cost=comp_delay,
            storage_cost=1,
        )
        for m, (_, accuracy, comp_delay) in enumerate(REAL_WORLD_MODELS, start=1)
    )

    requests = []
    for u in range(1, num_requests + 1):
        eps = float(np.clip(rng.exponential(1.0 / FIXTURE_ALPHA_RATE), 0.0, 1.0))
        delta = float(
            np.clip(
                rng.normal(FIXTURE_DELTA_MEAN, FIXTURE_DELTA_SD), 0.0, FIXTURE_DELAY_MAX
            )
        )
        requests.append(
            UserRequest(
                user_id=u,
                covering_edge=1,
                requested_service=1,
                accuracy_threshold=1.0 - eps,
                delay_threshold=delta,
            )
        )

    meta = {
        "seed": int(seed),
        "generator": GENERATOR_VERSION,
        "exp_param_mode": ExpParamMode.RATE.value,
        "models": [name for name, _, _ in REAL_WORLD_MODELS],
        "transmission_time": transmission_time,
    }
    return Scenario(
        edges=(edge,),
        services=(Service(service_id=1, models=models),),
        requests=tuple(requests),
        delay_max=FIXTURE_DELAY_MAX,
        meta=meta,
    )
