"""Substitute Black-Scholes inputs for markets that trade no options.

Strike is the spot grown by the base month's mean daily log change, time is a
trading-day ordinal over the trading year, and volatility is the sum of the
twelve trailing monthly standard deviations of close prices (in price units,
not returns).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields, replace
from datetime import date
from decimal import Decimal
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from .market_data import DataError, PriceSeries, slice_month

ROUNDING_MODES = ("exact", "round3")
ANCHOR_MODES = ("year", "window")


@dataclass(frozen=True)
class ReturnStats:
    entries: tuple[tuple[date, float], ...]
    mean_drift: float
    n: int

    @classmethod
    def from_entries(cls, entries: Iterable[tuple[date, float]]) -> "ReturnStats":
        entries = tuple((d, float(x)) for d, x in entries)
        return cls(entries, mean_drift([x for _, x in entries]), len(entries))

    @property
    def values(self) -> np.ndarray:
        return np.array([x for _, x in self.entries], dtype=float)


@dataclass(frozen=True)
class VolatilityLedger:
    """Twelve trailing monthly close-price standard deviations and their sum."""

    months: tuple[tuple[tuple[int, int], float], ...]
    sigma_annual: float

    def __post_init__(self):
        if len(self.months) != 12:
            raise DataError(f"a volatility ledger needs 12 months, got {len(self.months)}")

    def to_csv(self) -> str:
        lines = ["month,sigma"]
        lines += [f"{y:04d}-{m:02d},{s!r}" for (y, m), s in self.months]
        lines.append(f"sum,{self.sigma_annual!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class MarketConfig:
    """Per-run pricing configuration.

    ``anchor`` selects where the trading-day count for the time fraction
    starts: ``"year"`` counts from the first trading day of the target date's
    calendar year, ``"window"`` from the first trading day of the trailing
    12-month volatility window. ``freeze_time`` holds the first row's time
    fraction for every day of a forecast month. ``volatility_override``
    replaces the derived twelve-month volatility sum when set.
    """

    risk_free_rate: float = 0.0
    dividend_yield: float = 0.0
    year_length: int = 261
    time_rounding: str = "round3"
    anchor: str = "year"
    freeze_time: bool = False
    sigma_floor: float = 1e-9
    volatility_override: float | None = None

    def __post_init__(self):
        if not self.risk_free_rate >= 0:
            raise ValueError("risk_free_rate must be >= 0")
        if not self.dividend_yield >= 0:
            raise ValueError("dividend_yield must be >= 0")
        if int(self.year_length) != self.year_length or self.year_length <= 0:
            raise ValueError("year_length must be a positive integer")
        if self.time_rounding not in ROUNDING_MODES:
            raise ValueError(f"time_rounding must be one of {ROUNDING_MODES}")
        if self.anchor not in ANCHOR_MODES:
            raise ValueError(f"anchor must be one of {ANCHOR_MODES}")
        if not self.sigma_floor > 0:
            raise ValueError("sigma_floor must be > 0")
        if self.volatility_override is not None and not self.volatility_override > 0:
            raise ValueError("volatility_override must be > 0")

    @property
    def r(self) -> float:
        return self.risk_free_rate

    @property
    def q(self) -> float:
        return self.dividend_yield

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> "MarketConfig":
        """Build from string key/values; unknown keys are ignored."""
        aliases = {"r": "risk_free_rate", "q": "dividend_yield"}
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = aliases.get(key, key)
            if key not in types or raw is None:
                continue
            if key == "year_length":
                kwargs[key] = int(raw)
            elif key == "freeze_time":
                kwargs[key] = raw if isinstance(raw, bool) else str(raw).strip().lower() in {"1", "true", "yes", "on"}
            elif key in ("time_rounding", "anchor"):
                kwargs[key] = str(raw).strip()
            else:
                kwargs[key] = _parse_rate(raw)
        return cls(**kwargs)

    def with_overrides(self, **changes) -> "MarketConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _parse_rate(raw) -> float:
    """Accept ``0.0589`` or ``5.89%``."""
    if isinstance(raw, (int, float)):
        return float(raw)
    text = str(raw).strip()
    if text.endswith("%"):
        # decimal division so 5.89% reads back as 0.0589 exactly
        try:
            return float(Decimal(text[:-1]) / 100)
        except ArithmeticError:
            raise ValueError(f"bad rate {text!r}") from None
    return float(text)


def read_key_value(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def load_market_config(path) -> MarketConfig:
    return MarketConfig.from_mapping(read_key_value(path))


# Treasury-bill rates and dividend yields per instrument, shipped as package data.


@dataclass(frozen=True)
class RateEntry:
    instrument: str
    exchange: str
    rate_date: date | None
    risk_free_rate: float
    dividend_date: date | None
    dividend_yield: float


def load_rate_book(path=None) -> list[RateEntry]:
    from .market_data import parse_date

    if path is None:
        text = resources.files("frontier_bsm").joinpath("data/rate_book.csv").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    entries = []
    for row in csv.DictReader(text.splitlines()):
        entries.append(
            RateEntry(
                instrument=row["instrument"].strip(),
                exchange=row["exchange"].strip(),
                rate_date=parse_date(row["rate_date"]) if row["rate_date"].strip() else None,
                risk_free_rate=_parse_rate(row["risk_free_rate"]),
                dividend_date=parse_date(row["dividend_date"]) if row["dividend_date"].strip() else None,
                # a blank dividend cell means no listed yield; treated as zero
                dividend_yield=_parse_rate(row["dividend_yield"]) if row["dividend_yield"].strip() else 0.0,
            )
        )
    return entries


def lookup_rates(instrument: str, on: date | None = None, book: Sequence[RateEntry] | None = None) -> RateEntry:
    """Latest entry for ``instrument`` dated on or before ``on`` (else the earliest one)."""
    book = load_rate_book() if book is None else book
    matches = [e for e in book if e.instrument.lower() == instrument.lower()]
    if not matches:
        raise KeyError(f"instrument {instrument!r} not in rate book")
    matches.sort(key=lambda e: e.rate_date or date.min)
    if on is None:
        return matches[-1]
    eligible = [e for e in matches if e.rate_date is None or e.rate_date <= on]
    return eligible[-1] if eligible else matches[0]


def mean_drift(values: Sequence[float]) -> float:
    """Arithmetic mean of daily log changes."""
    values = [float(v) for v in values]
    if not values:
        raise ValueError("mean_drift needs at least one return")
    return math.fsum(values) / len(values)


def strike_price(spot: float, mean: float) -> float:
    if not spot > 0:
        raise ValueError(f"spot must be positive, got {spot!r}")
    return spot * math.exp(mean)


def time_fraction(day_index: int, config: MarketConfig) -> float:
    """Trading-day ordinal over the trading-year length.

    In ``round3`` mode the quotient is truncated (not rounded) to three
    decimals, so 43/261 = 0.16475... becomes 0.164.
    """
    if int(day_index) != day_index or day_index < 1:
        raise ValueError(f"day_index must be a positive integer, got {day_index!r}")
    day_index = int(day_index)
    if config.time_rounding == "round3":
        return (day_index * 1000 // config.year_length) / 1000
    return day_index / config.year_length


def monthly_std(month_series: PriceSeries | Sequence[float]) -> float:
    """Sample standard deviation (n - 1 denominator) of close prices."""
    closes = month_series.closes if isinstance(month_series, PriceSeries) else np.asarray(month_series, dtype=float)
    if closes.size < 2:
        raise DataError(f"monthly_std needs at least 2 closes, got {closes.size}")
    return float(np.std(closes, ddof=1))


def shift_month(year: int, month: int, offset: int) -> tuple[int, int]:
    k = year * 12 + (month - 1) + offset
    return k // 12, k % 12 + 1


def trailing_months(target_month: tuple[int, int], count: int = 12) -> list[tuple[int, int]]:
    """The ``count`` calendar months immediately preceding ``target_month``, oldest first."""
    y, m = target_month
    return [shift_month(y, m, -k) for k in range(count, 0, -1)]


def annual_volatility(series: PriceSeries, target_month: tuple[int, int]) -> VolatilityLedger:
    months = []
    for ym in trailing_months(target_month):
        part = slice_month(series, *ym)
        if len(part) < 2:
            raise DataError(
                f"month {ym[0]:04d}-{ym[1]:02d} has {len(part)} bar(s); "
                f"volatility for {target_month[0]:04d}-{target_month[1]:02d} needs >= 2 in each trailing month"
            )
        months.append((ym, monthly_std(part)))
    return VolatilityLedger(tuple(months), math.fsum(s for _, s in months))
