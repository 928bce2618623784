"""One-hidden-layer perceptron trained by per-example backpropagation with momentum."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import SupervisedDataset


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class MlpParams:
    cycles: int = 500
    learning_rate: float = 0.3
    momentum: float = 0.2
    seed: int = 0
    hidden: int | None = None
    shuffle: bool = False


@dataclass
class MlpWeights:
    W1: np.ndarray  # (hidden, inputs)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    def flat(self) -> np.ndarray:
        return np.concatenate([self.W1.ravel(), self.b1, self.w2, [self.b2]])

    @classmethod
    def unflat(cls, v: np.ndarray, hidden: int, inputs: int) -> "MlpWeights":
        a = hidden * inputs
        return cls(v[:a].reshape(hidden, inputs).copy(), v[a : a + hidden].copy(), v[a + hidden : a + 2 * hidden].copy(), float(v[-1]))


def _sigmoid(a):
    return 1.0 / (1.0 + np.exp(-a))


def forward(weights: MlpWeights, X: np.ndarray) -> np.ndarray:
    """Network output for normalized inputs ``X`` (rows are examples)."""
    h = _sigmoid(X @ weights.W1.T + weights.b1)
    return h @ weights.w2 + weights.b2


def loss_and_gradient(weights: MlpWeights, X: np.ndarray, y: np.ndarray) -> tuple[float, MlpWeights]:
    """Loss ``0.5 * sum((out - y)**2)`` over the rows and its exact gradient."""
    X = np.atleast_2d(X)
    y = np.atleast_1d(y)
    h = _sigmoid(X @ weights.W1.T + weights.b1)
    err = h @ weights.w2 + weights.b2 - y
    delta_h = np.outer(err, weights.w2) * h * (1.0 - h)
    grad = MlpWeights(delta_h.T @ X, delta_h.sum(axis=0), h.T @ err, float(err.sum()))
    return 0.5 * float(err @ err), grad


def default_hidden_size(n_features: int) -> int:
    return (n_features + 1) // 2 + 1


@dataclass
class MlpModel:
    feature_names: tuple[str, ...]
    weights: MlpWeights
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float
    params: MlpParams = field(default_factory=MlpParams)
    loss_history: list[float] = field(default_factory=list, repr=False)

    @property
    def hidden(self) -> int:
        return self.weights.W1.shape[0]

    def predict(self, data) -> np.ndarray:
        X = data.X if isinstance(data, SupervisedDataset) else np.atleast_2d(np.asarray(data, dtype=float))
        z = forward(self.weights, (X - self.x_mean) / self.x_std)
        return z * self.y_std + self.y_mean

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "params": vars(self.params).copy(),
            "x_mean": self.x_mean.tolist(),
            "x_std": self.x_std.tolist(),
            "y_mean": self.y_mean,
            "y_std": self.y_std,
            "W1": self.weights.W1.tolist(),
            "b1": self.weights.b1.tolist(),
            "w2": self.weights.w2.tolist(),
            "b2": self.weights.b2,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        weights = MlpWeights(np.array(d["W1"], dtype=float), np.array(d["b1"], dtype=float), np.array(d["w2"], dtype=float), float(d["b2"]))
        return cls(
            tuple(d["feature_names"]),
            weights,
            np.array(d["x_mean"], dtype=float),
            np.array(d["x_std"], dtype=float),
            float(d["y_mean"]),
            float(d["y_std"]),
            MlpParams(**d["params"]),
        )


def _scale(values: np.ndarray, axis=0):
    mean = values.mean(axis=axis)
    std = values.std(axis=axis)
    # constant columns are only centred
    std = np.where(std > 0, std, 1.0)
    return mean, std


def init_weights(n_inputs: int, hidden: int, rng: np.random.Generator) -> MlpWeights:
    return MlpWeights(
        rng.uniform(-0.5, 0.5, size=(hidden, n_inputs)),
        rng.uniform(-0.5, 0.5, size=hidden),
        rng.uniform(-0.5, 0.5, size=hidden),
        float(rng.uniform(-0.5, 0.5)),
    )


def fit_mlp(data: SupervisedDataset, params: MlpParams | None = None, **overrides) -> MlpModel:
    """Train on z-normalized features and label.

    Each cycle visits every row once, in dataset order unless ``shuffle`` is
    set, applying ``dw = -learning_rate * grad + momentum * dw_prev`` after
    every row.
    """
    params = MlpParams(**{**vars(params or MlpParams()), **overrides})
    if len(data) == 0:
        raise ValueError("cannot fit a network on an empty dataset")
    x_mean, x_std = _scale(data.X)
    y_mean, y_std = _scale(data.y)
    X = (data.X - x_mean) / x_std
    y = (data.y - y_mean) / y_std
    hidden = params.hidden or default_hidden_size(X.shape[1])
    rng = np.random.default_rng(params.seed)
    w = init_weights(X.shape[1], hidden, rng)

    W1, b1, w2, b2 = w.W1, w.b1, w.w2, w.b2
    vW1, vb1, vw2, vb2 = np.zeros_like(W1), np.zeros_like(b1), np.zeros_like(w2), 0.0
    lr, mu = params.learning_rate, params.momentum
    history = []
    order = np.arange(len(y))
    # inlined single-row form of loss_and_gradient, updated in place
    for epoch in range(params.cycles):
        if params.shuffle:
            rng.shuffle(order)
        total = 0.0
        for i in order:
            x = X[i]
            h = 1.0 / (1.0 + np.exp(-(W1 @ x + b1)))
            err = float(w2 @ h) + b2 - y[i]
            total += 0.5 * err * err
            delta = err * w2 * h * (1.0 - h)
            vW1 *= mu
            vW1 -= lr * np.outer(delta, x)
            vb1 *= mu
            vb1 -= lr * delta
            vw2 *= mu
            vw2 -= (lr * err) * h
            vb2 = mu * vb2 - lr * err
            W1 += vW1
            b1 += vb1
            w2 += vw2
            b2 += vb2
        if not np.isfinite(total):
            raise TrainingDiverged(f"non-finite training loss at epoch {epoch}")
        history.append(total)
    w = MlpWeights(W1, b1, w2, float(b2))
    return MlpModel(data.feature_names, w, x_mean, x_std, float(y_mean), float(y_std), params, history)
