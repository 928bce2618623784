"""Monthly close-price volatility, its twelve-month sum, and a simple spike flag.

    python demos/volatility_ledger.py
"""

from frontier_bsm import annual_volatility, volatility_trend
from frontier_bsm.reference_data import afi_reconstructed

series = afi_reconstructed()

ledger = annual_volatility(series, (2016, 3))
print("trailing twelve months before March 2016")
for (y, m), s in ledger.months:
    print(f"  {y}-{m:02d}  {s:8.4f}")
print(f"  sum      {ledger.sigma_annual:8.4f}")

# a month is flagged when its std exceeds 1.5x the mean of the six before it
print("\nspike scan, window 6, ratio 1.5")
for (y, m), s, spike in volatility_trend(series, months_window=6, spike_ratio=1.5):
    print(f"  {y}-{m:02d}  {s:8.4f}{'  SPIKE' if spike else ''}")
