from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import SupervisedDataset
from .linear import fit_relative_regression
from .mlp import MlpParams, fit_mlp
from .tree import fit_tree


@dataclass
class EnsembleModel:
    """Numeric vote: the plain mean of the member predictions."""

    members: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("an ensemble needs at least one member")

    def member_predictions(self, data) -> np.ndarray:
        return np.vstack([m.predict(data) for m in self.members])

    def predict(self, data) -> np.ndarray:
        preds = self.member_predictions(data)
        # fsum makes the mean independent of member order
        return np.array([math.fsum(col) / len(col) for col in preds.T])


def ensemble_predict(model: EnsembleModel, row) -> float:
    """Prediction for a single feature row (or a one-row dataset)."""
    return float(model.predict(row)[0])


def fit_ensemble(
    data: SupervisedDataset,
    tree_depth: int = 20,
    minimal_gain: float = 0.15,
    mlp_params: MlpParams | None = None,
    reference_features: Sequence[str] = ("close-0",),
) -> EnsembleModel:
    members = [fit_tree(data, max_depth=tree_depth, minimal_gain=minimal_gain), fit_mlp(data, mlp_params)]
    members += [fit_relative_regression(data, ref) for ref in reference_features]
    return EnsembleModel(members)
