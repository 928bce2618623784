from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SupervisedDataset


class RankDeficientError(ValueError):
    pass


@dataclass
class RelativeRegressionModel:
    """Linear model of ``label - reference`` on all features plus an intercept."""

    feature_names: tuple[str, ...]
    reference_feature: str
    intercept: float
    coefficients: np.ndarray

    def predict_delta(self, data) -> np.ndarray:
        X = data.X if isinstance(data, SupervisedDataset) else np.atleast_2d(np.asarray(data, dtype=float))
        return self.intercept + X @ self.coefficients

    def predict(self, data) -> np.ndarray:
        X = data.X if isinstance(data, SupervisedDataset) else np.atleast_2d(np.asarray(data, dtype=float))
        ref = X[:, self.feature_names.index(self.reference_feature)]
        return ref + self.predict_delta(X)

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "reference_feature": self.reference_feature,
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RelativeRegressionModel":
        return cls(tuple(d["feature_names"]), d["reference_feature"], float(d["intercept"]), np.array(d["coefficients"], dtype=float))


def fit_relative_regression(data: SupervisedDataset, reference_feature: str = "close-0") -> RelativeRegressionModel:
    """Ordinary least squares on the label's deviation from ``reference_feature``.

    The normal equations are solved on centred, unit-scaled columns for
    conditioning; a rank check on that Gram matrix rejects collinear designs.
    """
    if reference_feature not in data.feature_names:
        raise KeyError(f"reference feature {reference_feature!r} not among {data.feature_names}")
    X, ref = data.X, data.column(reference_feature)
    target = data.y - ref
    n, p = X.shape
    if n < p + 1:
        raise RankDeficientError(f"{n} rows cannot identify {p} coefficients and an intercept")

    x_mean = X.mean(axis=0)
    x_scale = X.std(axis=0)
    constant = np.flatnonzero(x_scale == 0)
    if constant.size:
        names = [data.feature_names[j] for j in constant]
        raise RankDeficientError(f"constant feature(s) {names} are collinear with the intercept")
    Z = (X - x_mean) / x_scale
    t_mean = target.mean()
    gram = Z.T @ Z
    rank = np.linalg.matrix_rank(gram, tol=np.finfo(float).eps * n * p * max(1.0, np.abs(gram).max()) * 1e3)
    if rank < p:
        raise RankDeficientError(f"design has rank {rank} < {p} features; drop collinear features")
    beta_z = np.linalg.solve(gram, Z.T @ (target - t_mean))
    coef = beta_z / x_scale
    intercept = float(t_mean - x_mean @ coef)
    return RelativeRegressionModel(data.feature_names, reference_feature, intercept, coef)
