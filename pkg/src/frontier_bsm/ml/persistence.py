"""Versioned JSON model files, exact enough for bit-identical re-prediction."""

from __future__ import annotations

import json

from .ensemble import EnsembleModel
from .linear import RelativeRegressionModel
from .mlp import MlpModel
from .tree import TreeModel

FORMAT = "frontier-bsm-model"
VERSION = 1

_KINDS = {"tree": TreeModel, "mlp": MlpModel, "relative_regression": RelativeRegressionModel}


def _kind(model) -> str:
    for kind, cls in _KINDS.items():
        if isinstance(model, cls):
            return kind
    if isinstance(model, EnsembleModel):
        return "ensemble"
    raise TypeError(f"cannot serialise {type(model).__name__}")


def model_to_dict(model) -> dict:
    kind = _kind(model)
    if kind == "ensemble":
        body = {"members": [model_to_dict(m) for m in model.members]}
    else:
        body = model.to_dict()
    return {"format": FORMAT, "version": VERSION, "kind": kind, "model": body}


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT:
        raise ValueError("not a frontier-bsm model document")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    kind = doc["kind"]
    if kind == "ensemble":
        return EnsembleModel([model_from_dict(m) for m in doc["model"]["members"]])
    if kind not in _KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    return _KINDS[kind].from_dict(doc["model"])


def dumps_model(model, **metadata) -> str:
    doc = model_to_dict(model)
    if metadata:
        doc["metadata"] = metadata
    return json.dumps(doc, indent=1) + "\n"


def loads_model(text: str):
    return model_from_dict(json.loads(text))
