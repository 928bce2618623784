"""Walk one forecast day through the pricing model by hand.

Starts from the February 2016 closes of the bundled AFI fixture, derives the
strike, time fraction and volatility, then prices the call and put and
averages them into a predicted close.

    python demos/pricing_worksheet.py
"""

import math

from frontier_bsm import MarketConfig, PricingInputs, annual_volatility, mean_drift, price_options, strike_price, time_fraction
from frontier_bsm.market_data import daily_log_returns, slice_month, trading_day_index
from frontier_bsm.reference_data import afi_reconstructed

series = afi_reconstructed()
config = MarketConfig(risk_free_rate=0.0248, dividend_yield=0.0589)

# February returns, including the step from the last January close
feb = series.between(end=slice_month(series, 2016, 2).dates[-1])
returns = [v for d, v in daily_log_returns(feb).entries if (d.year, d.month) == (2016, 2)]
mu = mean_drift(returns)

spot = slice_month(series, 2016, 2).closes[0]
K = strike_price(spot, mu)

march = slice_month(series, 2016, 3)
# days are counted from the first trading day of the target year
anchor = next(d for d in series.dates if d.year == 2016)
day = trading_day_index(series.calendar(), march.dates[0], anchor)
T = time_fraction(day, config)

ledger = annual_volatility(series, (2016, 3))

print(f"{len(returns)} February returns, mean {mu:.10f}")
print(f"spot {spot:.4f}  e^mean {math.exp(mu):.10f}  strike {K:.6f}")
print(f"first March day is trading day {day}, T = {T}")
for (y, m), s in ledger.months:
    print(f"  sigma {y}-{m:02d}  {s:.6f}")
print(f"  sum            {ledger.sigma_annual:.6f}")

quote = price_options(PricingInputs(S=spot, K=K, r=config.r, q=config.q, sigma=ledger.sigma_annual, T=T))
print(f"d1 {quote.d1:.6f}  d2 {quote.d2:.6f}")
print(f"call {quote.call:.6f}  put {quote.put:.6f}")
print(f"predicted close {quote.predicted_close:.6f}  (actual {march.closes[0]:.4f})")
