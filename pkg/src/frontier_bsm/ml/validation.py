"""Walk-forward (sliding window) validation scored by trend accuracy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..evaluation import trend_counts
from ..market_data import DataError, PriceSeries
from .dataset import SupervisedDataset, windowize
from .ensemble import fit_ensemble
from .linear import fit_relative_regression
from .mlp import MlpParams, fit_mlp
from .tree import fit_tree

Learner = Callable[[SupervisedDataset], object]


def make_learner(name: str, seed: int = 0) -> Learner:
    """Named learner profiles: ``tree`` (depth 25), ``mlp``, ``relative``, ``ensemble`` (tree depth 20)."""
    if name == "tree":
        return lambda d: fit_tree(d, max_depth=25, minimal_gain=0.15)
    if name == "mlp":
        return lambda d: fit_mlp(d, MlpParams(seed=seed))
    if name == "relative":
        return lambda d: fit_relative_regression(d, "close-0")
    if name == "ensemble":
        return lambda d: fit_ensemble(d, tree_depth=20, mlp_params=MlpParams(seed=seed))
    raise ValueError(f"unknown learner {name!r}")


@dataclass(frozen=True)
class Fold:
    train: tuple[int, int]  # half-open row range
    test: tuple[int, int]
    hits: int
    comparisons: int

    @property
    def accuracy(self) -> float:
        return self.hits / self.comparisons


@dataclass(frozen=True)
class ValidationResult:
    folds: tuple[Fold, ...]
    mean: float
    std: float
    micro: float

    def format(self) -> str:
        return f"Prediction trend accuracy: {self.mean:.3f} +/- {self.std:.3f} (micro average: {self.micro:.3f})"


def fold_layout(n_rows: int, train_width: int, step: int, test_width: int, horizon: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Row ranges of every fold; the test window starts ``horizon`` rows after the last training row."""
    folds = []
    start = 0
    while True:
        train_end = start + train_width
        test_start = train_end + horizon - 1
        test_end = test_start + test_width
        if test_end > n_rows:
            break
        folds.append(((start, train_end), (test_start, test_end)))
        start += step
    return folds


def sliding_window_validate(
    data: PriceSeries | SupervisedDataset,
    learner: str | Learner = "mlp",
    train_width: int = 3,
    step: int = 1,
    test_width: int = 3,
    horizon: int = 1,
    window_size: int = 1,
    attributes: Sequence[str] = (),
    seed: int = 0,
) -> ValidationResult:
    """Fit ``learner`` on each training window and score trend accuracy on the adjacent test window.

    ``mean``/``std`` summarise per-fold accuracies (sample std); ``micro``
    pools hits over every compared test step of every fold.
    """
    if min(train_width, step, horizon) < 1:
        raise ValueError("train_width, step and horizon must be >= 1")
    if test_width < 2:
        raise ValueError("trend accuracy needs a test window of at least 2 rows")
    dataset = windowize(data, window_size, 1, 1, attributes) if isinstance(data, PriceSeries) else data
    fit = make_learner(learner, seed) if isinstance(learner, str) else learner
    layout = fold_layout(len(dataset), train_width, step, test_width, horizon)
    if not layout:
        raise DataError(f"{len(dataset)} rows are too few for one fold of train {train_width} + test {test_width}")
    folds = []
    for (a, b), (c, d) in layout:
        model = fit(dataset.subset(slice(a, b)))
        test = dataset.subset(slice(c, d))
        hits, total = trend_counts(np.asarray(model.predict(test), dtype=float), test.y)
        folds.append(Fold((a, b), (c, d), hits, total))
    acc = np.array([f.accuracy for f in folds])
    std = float(np.std(acc, ddof=1)) if acc.size > 1 else 0.0
    micro = sum(f.hits for f in folds) / sum(f.comparisons for f in folds)
    return ValidationResult(tuple(folds), float(math.fsum(acc) / acc.size), std, micro)
