"""Ingestion, validation and slicing of daily OHLCV price histories.

Trading days are defined by the data itself: whatever dates appear in a
series form its calendar. Rows with a missing or unparseable field are
dropped at load time, never imputed.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
import os
import re
from dataclasses import dataclass, field
from datetime import date
from typing import Iterable, Mapping, Sequence

import numpy as np

ATTRIBUTES = ("date", "open", "high", "low", "close", "volume")

DEFAULT_SCHEMA = {name: name.upper() for name in ATTRIBUTES}

_MISSING = {"", "na", "n/a", "nan", "null", "none", "-"}

_DAY_FIRST = re.compile(r"^(\d{1,2})[-/.](\d{1,2})[-/.](\d{2}|\d{4})$")
_ISO = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")


class DataError(ValueError):
    """Raised when a price source cannot be turned into a valid series."""


@dataclass(frozen=True)
class PriceBar:
    date: date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self):
        for name in ("open", "high", "low", "close"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DataError(f"{name} must be a positive finite price, got {value!r} on {self.date}")
        if not (math.isfinite(self.volume) and self.volume >= 0):
            raise DataError(f"volume must be non-negative, got {self.volume!r} on {self.date}")


@dataclass(frozen=True)
class PriceSeries:
    """Ordered daily history of one instrument.

    ``dropped`` records how many source rows were rejected during ingestion;
    it is bookkeeping only and does not take part in equality.
    """

    instrument: str
    bars: tuple[PriceBar, ...]
    dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "bars", tuple(self.bars))
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date <= prev.date:
                raise DataError(f"dates must be strictly increasing: {prev.date} then {cur.date}")

    @classmethod
    def from_closes(cls, instrument: str, dates: Sequence[date], closes: Sequence[float]) -> "PriceSeries":
        """Build a close-only series (open = high = low = close, zero volume)."""
        if len(dates) != len(closes):
            raise DataError("dates and closes differ in length")
        bars = [PriceBar(d, c, c, c, c, 0.0) for d, c in zip(dates, map(float, closes))]
        return cls(instrument, tuple(bars))

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return PriceSeries(self.instrument, self.bars[item])
        return self.bars[item]

    @property
    def dates(self) -> list[date]:
        return [b.date for b in self.bars]

    @property
    def closes(self) -> np.ndarray:
        return np.array([b.close for b in self.bars], dtype=float)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(b, name) for b in self.bars], dtype=float)

    def calendar(self) -> "TradingCalendar":
        return TradingCalendar(tuple(self.dates))

    def between(self, start: date | None = None, end: date | None = None) -> "PriceSeries":
        """Bars with ``start <= date <= end`` (either bound optional)."""
        keep = [b for b in self.bars if (start is None or b.date >= start) and (end is None or b.date <= end)]
        return PriceSeries(self.instrument, tuple(keep))

    def months(self) -> list[tuple[int, int]]:
        """Distinct (year, month) pairs in order of appearance."""
        seen: list[tuple[int, int]] = []
        for b in self.bars:
            ym = (b.date.year, b.date.month)
            if not seen or seen[-1] != ym:
                seen.append(ym)
        return seen

    def to_csv(self) -> str:
        """Canonical CSV with ISO dates; floats written with full round-trip precision."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([DEFAULT_SCHEMA[a] for a in ATTRIBUTES])
        for b in self.bars:
            writer.writerow([b.date.isoformat(), repr(b.open), repr(b.high), repr(b.low), repr(b.close), repr(b.volume)])
        return buf.getvalue()


@dataclass(frozen=True)
class TradingCalendar:
    dates: tuple[date, ...]

    def __contains__(self, d: date) -> bool:
        i = bisect.bisect_left(self.dates, d)
        return i < len(self.dates) and self.dates[i] == d

    def position(self, d: date) -> int:
        i = bisect.bisect_left(self.dates, d)
        if i == len(self.dates) or self.dates[i] != d:
            raise DataError(f"{d} is not a trading day in this calendar")
        return i


def parse_date(text: str, date_format: str | None = None) -> date:
    """Parse ``dd-mm-yy``, ``dd-mm-yyyy`` or ISO ``yyyy-mm-dd``.

    Two-digit years pivot at 70: 00-69 map to the 2000s, 70-99 to the 1900s.
    An explicit strptime ``date_format`` is tried first when given.
    """
    from datetime import datetime

    text = text.strip()
    if date_format:
        try:
            return datetime.strptime(text, date_format).date()
        except ValueError:
            pass
    m = _ISO.match(text)
    if m:
        return date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    m = _DAY_FIRST.match(text)
    if m:
        day, month, year = int(m.group(1)), int(m.group(2)), m.group(3)
        y = int(year)
        if len(year) == 2:
            y += 2000 if y < 70 else 1900
        return date(y, month, day)
    raise ValueError(f"unrecognised date {text!r}")


def _parse_number(text: str) -> float:
    value = float(text.replace(",", "").strip())
    if not math.isfinite(value):
        raise ValueError(text)
    return value


def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8-sig")
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, "r", encoding="utf-8-sig", newline="") as fh:
                return fh.read()
        except OSError as exc:
            raise DataError(f"cannot read price source {os.fspath(source)!r}: {exc}") from exc
    data = source.read()
    return data.decode("utf-8-sig") if isinstance(data, bytes) else data


def load_price_series(
    source,
    schema: Mapping[str, str] | None = None,
    *,
    instrument: str | None = None,
    date_format: str | None = None,
) -> PriceSeries:
    """Load a delimited OHLCV file into a sorted, validated :class:`PriceSeries`.

    ``source`` is a path, raw bytes, or a readable stream. ``schema`` maps the
    attribute names (date, open, high, low, close, volume) to header names;
    header matching is case-insensitive. The delimiter is a tab if the header
    line contains one, else a comma.
    """
    text = _read_text(source)
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataError("price source is empty or has no header row")
    delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip().lower() for h in next(reader)]

    mapping = {**DEFAULT_SCHEMA, **(schema or {})}
    columns = {}
    for attr in ATTRIBUTES:
        name = mapping[attr].strip().lower()
        if name not in header:
            raise DataError(f"column {mapping[attr]!r} for {attr} not found in header {header}")
        columns[attr] = header.index(name)

    bars: list[PriceBar] = []
    dropped = 0
    for row in reader:
        if not any(cell.strip() for cell in row):
            continue
        try:
            cells = {attr: row[idx].strip() for attr, idx in columns.items()}
            if any(v.lower() in _MISSING for v in cells.values()):
                raise ValueError("missing field")
            bar = PriceBar(
                parse_date(cells["date"], date_format),
                *(_parse_number(cells[a]) for a in ("open", "high", "low", "close", "volume")),
            )
        except (ValueError, IndexError):
            dropped += 1
            continue
        bars.append(bar)

    if not bars:
        raise DataError("no parseable rows in price source")
    bars.sort(key=lambda b: b.date)
    for prev, cur in zip(bars, bars[1:]):
        if prev.date == cur.date:
            raise DataError(f"duplicate date {cur.date} in price source")

    if instrument is None:
        instrument = os.path.splitext(os.path.basename(os.fspath(source)))[0] if isinstance(source, (str, os.PathLike)) else ""
    return PriceSeries(instrument, tuple(bars), dropped)


def slice_month(series: PriceSeries, year: int, month: int) -> PriceSeries:
    return PriceSeries(
        series.instrument,
        tuple(b for b in series.bars if b.date.year == year and b.date.month == month),
    )


def trading_day_index(calendar: TradingCalendar, day: date, anchor: date) -> int:
    """1-based count of trading days from ``anchor`` through ``day`` inclusive."""
    if anchor > day:
        raise DataError(f"anchor {anchor} is after {day}")
    return calendar.position(day) - calendar.position(anchor) + 1


def daily_log_returns(series: PriceSeries):
    """Close-to-close log changes ``ln(close_t / close_{t-1})`` tagged with the later date."""
    from .parameters import ReturnStats

    if len(series) < 2:
        raise DataError("need at least 2 bars for daily log returns")
    closes = series.closes
    x = np.log(closes[1:] / closes[:-1])
    return ReturnStats.from_entries(zip(series.dates[1:], x.tolist()))


def concat(parts: Iterable[PriceSeries]) -> PriceSeries:
    parts = list(parts)
    instrument = parts[0].instrument if parts else ""
    return PriceSeries(instrument, tuple(b for p in parts for b in p.bars))
