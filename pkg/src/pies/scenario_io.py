"""Scenario JSON serialisation.

Save and load are lossless inverses at the value level. Parse problems
raise :class:`ScenarioFormatError` naming the offending key; entity
invariant violations surface as the model types' own ValueErrors.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .ann import (
    AnnArchitecture,
    AnnData,
    AnnHyperparams,
    AnnModel,
    AnnModelType,
)
from .model import (
    EdgeCloud,
    Scenario,
    Service,
    ServiceModelSpec,
    UserRequest,
)


class ScenarioFormatError(ValueError):
    """A scenario document is malformed; the message names the bad key."""


def _get(obj: dict, key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise ScenarioFormatError(f"expected an object at {where}")
    if key not in obj:
        raise ScenarioFormatError(f"missing key '{key}' in {where}")
    return obj[key]


def _number(obj: dict, key: str, where: str) -> float:
    value = _get(obj, key, where)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioFormatError(f"key '{key}' in {where} must be a number")
    return value


def _integer(obj: dict, key: str, where: str) -> int:
    value = _get(obj, key, where)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ScenarioFormatError(f"key '{key}' in {where} must be an integer")
    return value


def _int_list(obj: dict, key: str, where: str) -> tuple[int, ...]:
    value = _get(obj, key, where)
    if not isinstance(value, list) or any(
        not isinstance(v, int) or isinstance(v, bool) for v in value
    ):
        raise ScenarioFormatError(f"key '{key}' in {where} must be a list of integers")
    return tuple(value)


def scenario_to_dict(scenario: Scenario) -> dict:
    doc: dict[str, Any] = {"delay_max": scenario.delay_max}
    if scenario.meta is not None:
        doc["meta"] = scenario.meta
    doc["edges"] = [
        {
            "id": e.edge_id,
            "comm_capacity": e.comm_capacity,
            "comp_capacity": e.comp_capacity,
            "storage_capacity": e.storage_capacity,
        }
        for e in scenario.edges
    ]
    ann = scenario.ann
    doc["services"] = []
    for service in scenario.services:
        models = []
        for m in service.models:
            entry: dict[str, Any] = {
                "id": m.model_id,
                "accuracy": m.accuracy,
                "comm_cost": m.comm_cost,
                "comp_cost": m.comp_cost,
                "storage_cost": m.storage_cost,
            }
            if ann is not None:
                block = ann.models[m.key]
                entry["ann"] = {
                    "type": block.kind.value,
                    "layer_neurons": list(block.architecture.layer_neurons),
                    "layer_cycles": list(block.architecture.layer_cycles),
                }
                if block.split_index is not None:
                    entry["ann"]["split_index"] = block.split_index
            models.append(entry)
        doc["services"].append({"id": service.service_id, "models": models})
    doc["requests"] = []
    for r in scenario.requests:
        entry = {
            "id": r.user_id,
            "edge": r.covering_edge,
            "service": r.requested_service,
            "accuracy_threshold": r.accuracy_threshold,
            "delay_threshold": r.delay_threshold,
        }
        if ann is not None:
            entry["distance"] = ann.distances[r.user_id]
        doc["requests"].append(entry)
    if ann is not None:
        doc["ann_params"] = {
            "gamma": ann.params.gamma,
            "rho": ann.params.rho,
            "lambda_pnn": ann.params.lambda_pnn,
            "lambda_snn": ann.params.lambda_snn,
            "theta": ann.params.theta,
            "prune_output_layer": ann.params.prune_output_layer,
            "dist_max": ann.dist_max,
            "cloud_bps": ann.cloud_bps,
        }
    return doc


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    delay_max = _number(doc, "delay_max", "scenario")

    edges = []
    for i, entry in enumerate(_get(doc, "edges", "scenario")):
        where = f"edges[{i}]"
        edges.append(
            EdgeCloud(
                edge_id=_integer(entry, "id", where),
                comm_capacity=_number(entry, "comm_capacity", where),
                comp_capacity=_number(entry, "comp_capacity", where),
                storage_capacity=_integer(entry, "storage_capacity", where),
            )
        )

    ann_doc = doc.get("ann_params")
    ann_models: dict[tuple[int, int], AnnModel] = {}

    services = []
    for i, entry in enumerate(_get(doc, "services", "scenario")):
        where = f"services[{i}]"
        service_id = _integer(entry, "id", where)
        models = []
        for j, m in enumerate(_get(entry, "models", where)):
            m_where = f"{where}.models[{j}]"
            spec = ServiceModelSpec(
                service_id=service_id,
                model_id=_integer(m, "id", m_where),
                accuracy=_number(m, "accuracy", m_where),
                comm_cost=_number(m, "comm_cost", m_where),
                comp_cost=_number(m, "comp_cost", m_where),
                storage_cost=_integer(m, "storage_cost", m_where),
            )
            models.append(spec)
            if ann_doc is not None:
                block = _get(m, "ann", m_where)
                b_where = f"{m_where}.ann"
                kind_raw = _get(block, "type", b_where)
                try:
                    kind = AnnModelType(kind_raw)
                except ValueError:
                    raise ScenarioFormatError(
                        f"key 'type' in {b_where} must be one of dnn/pnn/snn"
                    ) from None
                arch = AnnArchitecture(
                    _int_list(block, "layer_neurons", b_where),
                    _int_list(block, "layer_cycles", b_where),
                )
                split = block.get("split_index")
                ann_models[spec.key] = AnnModel(kind, arch, split_index=split)
        services.append(Service(service_id=service_id, models=tuple(models)))

    requests = []
    distances: dict[int, float] = {}
    for i, entry in enumerate(_get(doc, "requests", "scenario")):
        where = f"requests[{i}]"
        req = UserRequest(
            user_id=_integer(entry, "id", where),
            covering_edge=_integer(entry, "edge", where),
            requested_service=_integer(entry, "service", where),
            accuracy_threshold=_number(entry, "accuracy_threshold", where),
            delay_threshold=_number(entry, "delay_threshold", where),
        )
        requests.append(req)
        if ann_doc is not None:
            distances[req.user_id] = _number(entry, "distance", where)

    ann = None
    if ann_doc is not None:
        where = "ann_params"
        params = AnnHyperparams(
            gamma=_number(ann_doc, "gamma", where),
            rho=_number(ann_doc, "rho", where),
            lambda_pnn=_number(ann_doc, "lambda_pnn", where),
            lambda_snn=_number(ann_doc, "lambda_snn", where),
            theta=_number(ann_doc, "theta", where),
            prune_output_layer=bool(ann_doc.get("prune_output_layer", False)),
        )
        ann = AnnData(
            params=params,
            dist_max=_number(ann_doc, "dist_max", where),
            cloud_bps=_number(ann_doc, "cloud_bps", where),
            models=ann_models,
            distances=distances,
        )

    return Scenario(
        edges=tuple(edges),
        services=tuple(services),
        requests=tuple(requests),
        delay_max=delay_max,
        ann=ann,
        meta=doc.get("meta"),
    )


def save(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps(scenario))


def dumps(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def load(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"invalid JSON in {path}: {exc}") from exc
    return scenario_from_dict(doc)
