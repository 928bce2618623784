"""Month-ahead forecast for March 2016, then a two-month rolling chain.

The rolling chain feeds each month's predicted closes back in as the base
month for the next one, so the second month never sees real prices.

    python demos/rolling_forecast.py
"""

from frontier_bsm import MarketConfig, forecast_month, rolling_forecast
from frontier_bsm.evaluation import comparison_report
from frontier_bsm.market_data import slice_month
from frontier_bsm.reference_data import afi_reconstructed

series = afi_reconstructed()
config = MarketConfig(risk_free_rate=0.0248, dividend_yield=0.0589)

report = forecast_month(series, (2016, 3), config)
print(report.explain(report.dates[0]))
print()

cmp = comparison_report(slice_month(series, 2016, 3), report)
print(cmp.format())
print()

for r in rolling_forecast(series, (2016, 3), horizon=2, config=config):
    y, m = r.target_month
    first, last = r.rows[0], r.rows[-1]
    print(f"{y}-{m:02d}: {len(r.rows)} days, sigma {r.sigma:.4f}, "
          f"first {first.predicted_close:.4f}, last {last.predicted_close:.4f}, dates from {r.target_dates_source}")
