"""Month-ahead close-price forecasts from the preceding month's closes.

For the i-th trading day of the target month the spot is the close of the
i-th trading day of the base (previous) month. Drift, volatility and rates are
held fixed for the whole month; only the time fraction advances day by day.
"""

from __future__ import annotations

import calendar
import csv
import io
import json
from dataclasses import asdict, dataclass
from datetime import date, timedelta

from .market_data import DataError, PriceBar, PriceSeries, TradingCalendar, concat, daily_log_returns, slice_month, trading_day_index
from .parameters import MarketConfig, VolatilityLedger, annual_volatility, monthly_std, shift_month, strike_price, time_fraction
from .pricing import PricingInputs, price_options, std_normal_cdf

ROW_FIELDS = (
    "target_date",
    "base_date",
    "base_close",
    "strike",
    "day_index",
    "T",
    "d1",
    "d2",
    "call",
    "put",
    "predicted_close",
    "actual_close",
    "padded",
)


@dataclass(frozen=True)
class ForecastRow:
    target_date: date
    base_date: date
    base_close: float
    strike: float
    day_index: int
    T: float
    d1: float
    d2: float
    call: float
    put: float
    predicted_close: float
    actual_close: float | None = None
    padded: bool = False


@dataclass(frozen=True)
class PredictionReport:
    instrument: str
    target_month: tuple[int, int]
    base_month: tuple[int, int]
    mean_drift: float
    volatility: VolatilityLedger
    sigma: float
    config: MarketConfig
    rows: tuple[ForecastRow, ...]
    target_dates_source: str
    alignment: str = "ordinal"

    @property
    def sigma_annual(self) -> float:
        return self.volatility.sigma_annual

    @property
    def dates(self) -> list[date]:
        return [r.target_date for r in self.rows]

    @property
    def predicted(self) -> list[float]:
        return [r.predicted_close for r in self.rows]

    def row_for(self, target_date: date) -> ForecastRow:
        for row in self.rows:
            if row.target_date == target_date:
                return row
        raise KeyError(f"no forecast row for {target_date}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(ROW_FIELDS)
        for row in self.rows:
            writer.writerow([_cell(getattr(row, f)) for f in ROW_FIELDS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "instrument": self.instrument,
            "target_month": _ym(self.target_month),
            "base_month": _ym(self.base_month),
            "alignment": self.alignment,
            "target_dates_source": self.target_dates_source,
            "mean_drift": self.mean_drift,
            "volatility": {
                "months": [{"month": _ym(ym), "sigma": s} for ym, s in self.volatility.months],
                "sigma_annual": self.volatility.sigma_annual,
                "sigma_used": self.sigma,
            },
            "config": asdict(self.config),
            "rows": [
                {f: (v.isoformat() if isinstance(v, date) else v) for f, v in asdict(row).items()} for row in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def explain(self, target_date: date) -> str:
        """Input/output breakdown for one day, laid out like a pricing worksheet."""
        row = self.row_for(target_date)
        growth = row.strike / row.base_close
        lines = [
            ("Current stock price (S) [close of %s]" % row.base_date.isoformat(), row.base_close),
            ("Mean daily price change", self.mean_drift),
            ("e^mean", growth),
            ("K/S", growth),
            ("Strike price (K)", row.strike),
            ("Trading day index", row.day_index),
            ("Time fraction (T)", row.T),
            ("Risk-free rate (r)", self.config.risk_free_rate),
            ("Dividend yield (q)", self.config.dividend_yield),
            ("Volatility (sigma)", self.sigma),
            ("d1", row.d1),
            ("d2", row.d2),
            ("N(d1)", std_normal_cdf(row.d1)),
            ("N(d2)", std_normal_cdf(row.d2)),
            ("N(-d1)", std_normal_cdf(-row.d1)),
            ("N(-d2)", std_normal_cdf(-row.d2)),
            ("Call (buying price)", row.call),
            ("Put (selling price)", row.put),
            ("Predicted close %s" % row.target_date.isoformat(), row.predicted_close),
        ]
        if row.actual_close is not None:
            lines.append(("Actual close", row.actual_close))
        width = max(len(label) for label, _ in lines)
        return "\n".join(f"{label:<{width}}  {_fmt(value)}" for label, value in lines) + "\n"


def _ym(ym: tuple[int, int]) -> str:
    return f"{ym[0]:04d}-{ym[1]:02d}"


def _fmt(value) -> str:
    if isinstance(value, int):
        return str(value)
    return f"{value:.10g}"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _projected_dates(base_dates: list[date], target_month: tuple[int, int]) -> list[date]:
    """Target-month dates falling on the weekdays the base month traded on."""
    weekdays = {d.weekday() for d in base_dates}
    y, m = target_month
    days = calendar.monthrange(y, m)[1]
    return [date(y, m, k) for k in range(1, days + 1) if date(y, m, k).weekday() in weekdays]


def _forecast(history: PriceSeries, reference: PriceSeries, target_month: tuple[int, int], config: MarketConfig) -> PredictionReport:
    y, m = target_month
    month_start = date(y, m, 1)
    history = history.between(end=month_start - timedelta(days=1))
    base_month = shift_month(y, m, -1)
    base = slice_month(history, *base_month)
    if len(base) < 2:
        raise DataError(f"base month {_ym(base_month)} needs >= 2 bars, found {len(base)}")

    # the last close before the base month anchors its first daily change
    earlier = [b for b in history.bars if b.date < base.bars[0].date]
    window = PriceSeries(history.instrument, tuple(earlier[-1:]) + base.bars)
    drift = daily_log_returns(window).mean_drift

    ledger = annual_volatility(history, target_month)
    if config.volatility_override is not None:
        sigma = config.volatility_override
    else:
        sigma = ledger.sigma_annual if ledger.sigma_annual > 0 else config.sigma_floor

    observed = slice_month(reference, y, m)
    if len(observed):
        target_dates = observed.dates
        actuals = {b.date: b.close for b in observed.bars}
        source = "data"
    else:
        target_dates = _projected_dates(base.dates, target_month)
        actuals = {}
        source = "projected"
    if not target_dates:
        raise DataError(f"target month {_ym(target_month)} has no trading dates")

    cal = TradingCalendar(tuple(history.dates) + tuple(target_dates))
    if config.anchor == "year":
        anchor = next(d for d in cal.dates if d.year == y)
    else:
        wy, wm = shift_month(y, m, -12)
        anchor = next(d for d in cal.dates if d >= date(wy, wm, 1))

    rows = []
    first_T = None
    for i, target in enumerate(target_dates):
        padded = i >= len(base)
        bar = base.bars[min(i, len(base) - 1)]
        index = trading_day_index(cal, target, anchor)
        T = time_fraction(index, config)
        if config.freeze_time:
            first_T = T if first_T is None else first_T
            T = first_T
        K = strike_price(bar.close, drift)
        quote = price_options(PricingInputs(bar.close, K, config.risk_free_rate, config.dividend_yield, sigma, T))
        rows.append(
            ForecastRow(
                target_date=target,
                base_date=bar.date,
                base_close=bar.close,
                strike=K,
                day_index=index,
                T=T,
                d1=quote.d1,
                d2=quote.d2,
                call=quote.call,
                put=quote.put,
                predicted_close=quote.predicted_close,
                actual_close=actuals.get(target),
                padded=padded,
            )
        )
    return PredictionReport(
        instrument=history.instrument,
        target_month=(y, m),
        base_month=base_month,
        mean_drift=drift,
        volatility=ledger,
        sigma=sigma,
        config=config,
        rows=tuple(rows),
        target_dates_source=source,
    )


def forecast_month(series: PriceSeries, target_month: tuple[int, int], config: MarketConfig) -> PredictionReport:
    """Forecast every trading day of ``target_month`` from the month before it.

    Target dates come from the series when it already holds that month
    (backtesting, with actual closes attached); otherwise they are projected
    onto the weekdays the base month traded on.
    """
    return _forecast(series, series, target_month, config)


def rolling_forecast(
    series: PriceSeries, start_month: tuple[int, int], horizon: int, config: MarketConfig
) -> list[PredictionReport]:
    """Chain ``horizon`` monthly forecasts, feeding each month's predictions in as the next base month."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    y, m = start_month
    history = series.between(end=date(y, m, 1) - timedelta(days=1))
    reports = []
    for k in range(horizon):
        report = _forecast(history, series, shift_month(y, m, k), config)
        reports.append(report)
        predicted = tuple(PriceBar(r.target_date, r.predicted_close, r.predicted_close, r.predicted_close, r.predicted_close, 0.0) for r in report.rows)
        history = concat([history, PriceSeries(series.instrument, predicted)])
    return reports


def volatility_trend(
    series: PriceSeries, months_window: int = 6, spike_ratio: float = 2.0
) -> list[tuple[tuple[int, int], float, bool]]:
    """Monthly close std with a spike flag against the trailing ``months_window`` mean.

    The first ``months_window`` months have no full trailing window and are
    never flagged.
    """
    if months_window < 1:
        raise ValueError("months_window must be >= 1")
    months = series.months()
    if len(months) < months_window + 1:
        raise DataError(f"need {months_window + 1} months of data, have {len(months)}")
    sigmas = []
    for ym in months:
        part = slice_month(series, *ym)
        if len(part) < 2:
            raise DataError(f"month {_ym(ym)} has fewer than 2 bars")
        sigmas.append(monthly_std(part))
    out = []
    for i, (ym, s) in enumerate(zip(months, sigmas)):
        flagged = False
        if i >= months_window:
            trailing = sum(sigmas[i - months_window : i]) / months_window
            flagged = s > spike_ratio * trailing
        out.append((ym, s, flagged))
    return out
