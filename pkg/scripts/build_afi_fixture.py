"""Regenerate src/frontier_bsm/data/afi_reconstructed.csv.

Months other than February 2016 are synthetic: a seeded random-walk shape is
standardised and rescaled so the month's sample std of closes (n - 1) matches
the listed monthly value to three decimals after rounding prices to four
decimals. January 2016 is pinned to end at the real 29 January close (328).
March 2016 is a seeded random walk from the last February close.

    python scripts/build_afi_fixture.py
"""

from __future__ import annotations

import calendar
from datetime import date
from pathlib import Path

import numpy as np

from frontier_bsm.reference_data import AFI_CLOSES_JAN29_FEB2016, AFI_MONTHLY_SIGMAS

OUT = Path(__file__).resolve().parents[1] / "src" / "frontier_bsm" / "data" / "afi_reconstructed.csv"


def weekdays(year, month):
    n = calendar.monthrange(year, month)[1]
    return [date(year, month, d) for d in range(1, n + 1) if date(year, month, d).weekday() < 5]


def month_closes(rng, n, sigma, start=None, end=None):
    for _ in range(1000):
        z = np.cumsum(rng.normal(size=n))
        z = (z - z.mean()) / z.std(ddof=1)
        level = end - sigma * z[-1] if end is not None else start + rng.normal(scale=1.0) - sigma * z[0]
        closes = np.round(level + sigma * z, 4)
        if end is not None:
            closes[-1] = end
        if round(float(np.std(closes, ddof=1)), 3) == sigma:
            return closes
    raise RuntimeError("could not hit target sigma")


def main():
    rng = np.random.default_rng(20160301)
    feb = dict(AFI_CLOSES_JAN29_FEB2016)
    rows = []  # (date, close)
    last = 330.0
    for (y, m), sigma in AFI_MONTHLY_SIGMAS:
        dates = weekdays(y, m)
        if (y, m) == (2016, 2):
            closes = [feb[d] for d in dates]
        elif (y, m) == (2016, 1):
            closes = month_closes(rng, len(dates), sigma, end=feb[date(2016, 1, 29)]).tolist()
        else:
            closes = month_closes(rng, len(dates), sigma, start=last).tolist()
        rows += list(zip(dates, closes))
        last = closes[-1]
    march = weekdays(2016, 3)
    walk = last + np.cumsum(rng.normal(scale=1.5, size=len(march)))
    rows += list(zip(march, np.round(walk, 2).tolist()))

    lines = ["DATE,OPEN,HIGH,LOW,CLOSE,VOLUME"]
    prev = rows[0][1]
    for d, close in rows:
        open_ = round(prev + rng.normal(scale=0.3), 4)
        high = round(max(open_, close) + abs(rng.normal(scale=0.6)), 4)
        low = round(min(open_, close) - abs(rng.normal(scale=0.6)), 4)
        volume = int(rng.integers(200, 5000))
        lines.append(f"{d:%d-%m-%y},{open_:.4f},{high:.4f},{low:.4f},{close:.4f},{volume}")
        prev = close
    OUT.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(rows)} rows to {OUT}")


if __name__ == "__main__":
    main()
