"""Performance-vector statistics and forecast-vs-actual comparison tables."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from datetime import date
from typing import Mapping, Sequence

import numpy as np

from .market_data import DataError, PriceSeries


@dataclass(frozen=True)
class Spread:
    mean: float
    std: float


@dataclass(frozen=True)
class MetricsVector:
    """``correlation`` is ``None`` when it is undefined (a constant sequence
    that does not equal the other one element-wise)."""

    rmse: float
    absolute_error: Spread
    relative_error_pct: Spread
    squared_error: Spread
    correlation: float | None
    squared_correlation: float | None
    trend_accuracy: float | None = None
    n: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def format(self) -> str:
        """Performance-vector layout: RMSE, absolute, relative, squared error, correlations."""

        def pm(s: Spread, pct=False):
            suffix = "%" if pct else ""
            return f"{s.mean:.9g}{suffix} +/- {s.std:.9g}{suffix}"

        corr = "undefined" if self.correlation is None else f"{self.correlation:.9g}"
        sq = "undefined" if self.squared_correlation is None else f"{self.squared_correlation:.9g}"
        lines = [
            f"Root mean squared error: {self.rmse:.9g} +/- 0",
            f"Absolute error: {pm(self.absolute_error)}",
            f"Relative error: {pm(self.relative_error_pct, pct=True)}",
            f"Squared error: {pm(self.squared_error)}",
            f"Correlation: {corr}",
            f"Squared correlation: {sq}",
        ]
        if self.trend_accuracy is not None:
            lines.append(f"Prediction trend accuracy: {self.trend_accuracy:.9g}")
        return "\n".join(lines)


def _spread(values: np.ndarray) -> Spread:
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return Spread(float(np.mean(values)), std)


def pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    """Pearson correlation; ``None`` when undefined.

    If either side is constant the coefficient is taken as 1 when the two
    sequences are equal element-wise and is undefined otherwise.
    """
    if np.all(a == a[0]) or np.all(b == b[0]):
        return 1.0 if np.array_equal(a, b) else None
    da, db = a - a.mean(), b - b.mean()
    r = float(da @ db / math.sqrt(float(da @ da) * float(db @ db)))
    return max(-1.0, min(1.0, r))


def regression_metrics(predicted: Sequence[float], actual: Sequence[float], relative: bool = True) -> MetricsVector:
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape or p.ndim != 1:
        raise ValueError(f"predicted and actual must be 1-d and equal length, got {p.shape} vs {a.shape}")
    if p.size == 0:
        raise ValueError("metrics need at least one value")
    e = p - a
    abs_e = np.abs(e)
    sq = e * e
    if relative:
        if np.any(a == 0):
            raise ValueError("relative error is undefined for a zero actual value")
        rel = abs_e / np.abs(a) * 100.0
        rel_spread = _spread(rel)
    else:
        rel_spread = Spread(math.nan, math.nan)
    corr = pearson(p, a)
    return MetricsVector(
        rmse=math.sqrt(float(np.mean(sq))),
        absolute_error=_spread(abs_e),
        relative_error_pct=rel_spread,
        squared_error=_spread(sq),
        correlation=corr,
        squared_correlation=None if corr is None else corr**2,
        trend_accuracy=trend_accuracy(p, a) if p.size >= 2 else None,
        n=int(p.size),
    )


def trend_counts(predicted: Sequence[float], actual: Sequence[float]) -> tuple[int, int]:
    """(matches, comparisons) for the direction-agreement test."""
    p = np.asarray(predicted, dtype=float)
    a = np.asarray(actual, dtype=float)
    if p.shape != a.shape:
        raise ValueError("predicted and actual differ in length")
    if p.size < 2:
        raise ValueError("trend accuracy needs at least 2 points")
    predicted_move = np.sign(p[1:] - a[:-1])
    actual_move = np.sign(a[1:] - a[:-1])
    return int(np.sum(predicted_move == actual_move)), int(p.size - 1)


def trend_accuracy(predicted: Sequence[float], actual: Sequence[float]) -> float:
    """Share of steps where the predicted move from the previous actual value
    has the same sign as the actual move (both zero counts as a match)."""
    hits, total = trend_counts(predicted, actual)
    return hits / total


@dataclass(frozen=True)
class ComparisonReport:
    dates: tuple[date, ...]
    actual: tuple[float, ...]
    series: dict[str, tuple[float, ...]]
    metrics: dict[str, MetricsVector]
    dropped: dict[str, tuple[date, ...]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        names = list(self.series)
        writer.writerow(["date", "actual", *names])
        for i, d in enumerate(self.dates):
            writer.writerow([d.isoformat(), repr(self.actual[i]), *(repr(self.series[n][i]) for n in names)])
        return buf.getvalue()

    def to_dict(self, config: Mapping | None = None) -> dict:
        return {
            "dates": [d.isoformat() for d in self.dates],
            "series": {"actual": list(self.actual), **{k: list(v) for k, v in self.series.items()}},
            "metrics": {k: m.to_dict() for k, m in self.metrics.items()},
            "dropped": {k: [d.isoformat() for d in v] for k, v in self.dropped.items()},
            "config": dict(config or {}),
        }

    def to_json(self, config: Mapping | None = None) -> str:
        return json.dumps(self.to_dict(config), indent=2) + "\n"

    def format(self) -> str:
        blocks = []
        for name, m in self.metrics.items():
            blocks.append(f"[{name}] n={m.n}\n{m.format()}")
        return "\n\n".join(blocks) + "\n"


def parse_comparison_csv(text: str) -> tuple[list[date], list[float], dict[str, list[float]]]:
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    names = header[2:]
    dates = [date.fromisoformat(r[0]) for r in rows[1:]]
    actual = [float(r[1]) for r in rows[1:]]
    series = {n: [float(r[2 + k]) for r in rows[1:]] for k, n in enumerate(names)}
    return dates, actual, series


def comparison_report(
    actual: PriceSeries | Mapping[date, float],
    bsopm=None,
    ml: Mapping[str, Mapping[date, float] | tuple[Sequence[date], Sequence[float]]] | None = None,
) -> ComparisonReport:
    """Inner-join actual closes with each predictor on date and score each one.

    ``bsopm`` is a :class:`~frontier_bsm.forecast.PredictionReport` (or a list
    of them); ``ml`` maps predictor names to ``{date: value}`` or
    ``(dates, values)``. Dates missing from any input are dropped and listed
    per input under ``dropped``.
    """
    if isinstance(actual, PriceSeries):
        actual_map = {b.date: b.close for b in actual.bars}
    else:
        actual_map = dict(actual)
    predictors: dict[str, dict[date, float]] = {}
    if bsopm is not None:
        reports = bsopm if isinstance(bsopm, (list, tuple)) else [bsopm]
        predictors["bsopm"] = {r.target_date: r.predicted_close for rep in reports for r in rep.rows}
    for name, values in (ml or {}).items():
        if isinstance(values, tuple):
            values = dict(zip(values[0], values[1]))
        predictors[name] = {d: float(v) for d, v in dict(values).items()}
    if not predictors:
        raise ValueError("comparison needs at least one predictor")

    common = set(actual_map)
    for values in predictors.values():
        common &= set(values)
    dates = tuple(sorted(common))
    if not dates:
        raise DataError("predictors and actual closes share no dates")
    # actual dates outside the predictors' span are not "dropped", just out of range
    span = [d for v in predictors.values() for d in v]
    lo, hi = min(span), max(span)
    dropped = {"actual": tuple(sorted(d for d in set(actual_map) - common if lo <= d <= hi))}
    dropped.update({k: tuple(sorted(set(v) - common)) for k, v in predictors.items()})

    act = tuple(float(actual_map[d]) for d in dates)
    series = {k: tuple(v[d] for d in dates) for k, v in predictors.items()}
    metrics = {k: regression_metrics(v, act) for k, v in series.items()}
    return ComparisonReport(dates, act, series, metrics, dropped)
