from __future__ import annotations

from datetime import date, timedelta

import numpy as np
import pytest

from frontier_bsm.market_data import PriceBar, PriceSeries
from frontier_bsm.reference_data import afi_reconstructed


def weekdays(start: date, end: date) -> list[date]:
    out, d = [], start
    while d <= end:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def series_from(dates, closes, instrument="SYN") -> PriceSeries:
    return PriceSeries.from_closes(instrument, dates, closes)


def random_walk_ohlc(n: int, seed: int, start=date(2014, 1, 1), instrument="WALK") -> PriceSeries:
    """Seeded geometric random walk with open/high/low bracketing each close."""
    rng = np.random.default_rng(seed)
    dates = weekdays(start, start + timedelta(days=2 * n + 30))[:n]
    close = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.01, n)))
    prev = np.concatenate([[100.0], close[:-1]])
    opens = prev * np.exp(rng.normal(0, 0.003, n))
    high = np.maximum(opens, close) * (1 + rng.uniform(0, 0.005, n))
    low = np.minimum(opens, close) * (1 - rng.uniform(0, 0.005, n))
    vol = rng.integers(1_000, 50_000, n).astype(float)
    bars = tuple(PriceBar(d, float(o), float(h), float(lo), float(c), float(v)) for d, o, h, lo, c, v in zip(dates, opens, high, low, close, vol))
    return PriceSeries(instrument, bars)


@pytest.fixture(scope="session")
def afi():
    return afi_reconstructed()


def pytest_terminal_summary(terminalreporter):
    acceptance = __import__("sys").modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.line(line)
