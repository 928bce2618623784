"""Modified Black-Scholes-Merton close-price forecasting for markets without options."""

from .forecast import ForecastRow, PredictionReport, forecast_month, rolling_forecast, volatility_trend
from .market_data import (
    DataError,
    PriceBar,
    PriceSeries,
    TradingCalendar,
    daily_log_returns,
    load_price_series,
    slice_month,
    trading_day_index,
)
from .parameters import (
    MarketConfig,
    ReturnStats,
    VolatilityLedger,
    annual_volatility,
    load_market_config,
    lookup_rates,
    mean_drift,
    monthly_std,
    strike_price,
    time_fraction,
)
from .pricing import OptionQuote, PricingDomainError, PricingInputs, d_terms, price_options, std_normal_cdf

__version__ = "0.1.0"
