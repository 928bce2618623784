from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from ..market_data import DataError, PriceSeries

BAR_ATTRIBUTES = ("open", "high", "low", "volume")


@dataclass(frozen=True)
class SupervisedDataset:
    """Rows of (id date, feature vector, close label) in temporal order."""

    ids: tuple[date, ...]
    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] != len(self.ids):
            raise ValueError(f"inconsistent dataset shapes: X{X.shape}, y{y.shape}, ids {len(self.ids)}")
        if X.shape[1] != len(self.feature_names):
            raise ValueError("feature_names does not match X columns")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains missing or non-finite values")
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, index) -> "SupervisedDataset":
        idx = np.arange(len(self))[index]
        return SupervisedDataset(tuple(self.ids[i] for i in idx), self.feature_names, self.X[idx], self.y[idx])

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]

    def where_ids(self, start: date | None = None, end: date | None = None) -> "SupervisedDataset":
        keep = [i for i, d in enumerate(self.ids) if (start is None or d >= start) and (end is None or d <= end)]
        return self.subset(keep)


def lag_name(lag: int) -> str:
    return f"close-{lag}"


def windowize(
    series: PriceSeries,
    window_size: int = 1,
    step: int = 1,
    horizon: int = 1,
    attributes: Sequence[str] = (),
) -> SupervisedDataset:
    """Turn a close series into lagged-window rows with a forward label.

    Each row holds the closes of ``window_size`` consecutive days (named
    ``close-0`` for the most recent, ``close-1`` for the day before, ...), and
    is labelled with the close ``horizon`` days after the window's last day.
    Windows start ``step`` days apart. ``attributes`` adds bar fields
    (open, high, low, volume) of the labelled day itself, mirroring a set-up
    where the day's other prices are known and only its close is predicted.
    The row id is the labelled day's date.
    """
    if window_size < 1 or step < 1 or horizon < 1:
        raise ValueError("window_size, step and horizon must all be >= 1")
    unknown = set(attributes) - set(BAR_ATTRIBUTES)
    if unknown:
        raise ValueError(f"unknown attributes {sorted(unknown)}")
    n = len(series)
    if n < window_size + horizon:
        raise DataError(f"series of {n} bars is too short for window {window_size} + horizon {horizon}")
    closes = series.closes
    extra = {a: series.column(a) for a in attributes}
    names = tuple(attributes) + tuple(lag_name(k) for k in range(window_size))
    ids, rows, labels = [], [], []
    for start in range(0, n - window_size - horizon + 1, step):
        last = start + window_size - 1
        target = last + horizon
        lags = closes[start : last + 1][::-1]
        rows.append([extra[a][target] for a in attributes] + lags.tolist())
        labels.append(closes[target])
        ids.append(series.bars[target].date)
    return SupervisedDataset(tuple(ids), names, np.array(rows, dtype=float), np.array(labels, dtype=float))


def split_linear(data: SupervisedDataset, ratio: float, gap: int = 0) -> tuple[SupervisedDataset, SupervisedDataset]:
    """First ``floor(ratio * n)`` rows train, the rest test; no shuffling.

    Adjacent windowized rows share closes, so the last training labels sit
    inside the first test rows' feature windows. ``gap`` drops that many rows
    from the front of the test partition; ``window_size + horizon - 1`` makes
    every training label strictly older than every test window.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    if gap < 0:
        raise ValueError("gap must be >= 0")
    # the epsilon keeps e.g. 0.7 * 10 from flooring to 6
    cut = int(np.floor(ratio * len(data) + 1e-9))
    if cut == 0 or cut + gap >= len(data):
        raise ValueError(f"split of {len(data)} rows at {ratio} (gap {gap}) leaves an empty partition")
    return data.subset(slice(0, cut)), data.subset(slice(cut + gap, None))
