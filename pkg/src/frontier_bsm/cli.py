"""Command-line front end: ingest, volatility, forecast, price, train, evaluate, compare."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict
from datetime import date, timedelta
from pathlib import Path


from .evaluation import comparison_report, regression_metrics
from .forecast import forecast_month, rolling_forecast, volatility_trend
from .market_data import DataError, load_price_series, parse_date, slice_month
from .ml.dataset import split_linear, windowize
from .ml.linear import RankDeficientError
from .ml.mlp import TrainingDiverged
from .ml.persistence import dumps_model, loads_model
from .ml.validation import make_learner, sliding_window_validate
from .parameters import MarketConfig, annual_volatility, lookup_rates, read_key_value, strike_price, time_fraction
from .pricing import PricingInputs, price_options, std_normal_cdf

PROFILES = {
    # profile -> (learner, bar attributes of the labelled day used as features)
    "standalone-tree": ("tree", ("open", "high", "low", "volume")),
    "tree": ("tree", ("open", "high", "low", "volume")),
    "mlp": ("mlp", ()),
    "ensemble": ("ensemble", ("open", "high", "low", "volume")),
}


class CliError(Exception):
    pass


def _month(text: str) -> tuple[int, int]:
    try:
        y, m = text.split("-")
        ym = int(y), int(m)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM, got {text!r}")
    if not 1 <= ym[1] <= 12:
        raise argparse.ArgumentTypeError(f"bad month in {text!r}")
    return ym


def _date(text: str) -> date:
    try:
        return parse_date(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _ym(ym) -> str:
    return f"{ym[0]:04d}-{ym[1]:02d}"


def write_atomic(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    return f"{x:.10g}"


# --- settings resolution -----------------------------------------------------


def _settings(args) -> dict:
    """Effective settings: CLI flags over the --config file over defaults."""
    file_values = read_key_value(args.config) if args.config else {}
    out = dict(file_values)
    for key, value in vars(args).items():
        if key in ("func", "config") or value is None:
            continue
        out[key] = value
    return out


def _market_config(args, series, target_month=None) -> MarketConfig:
    settings = _settings(args)
    r, q = settings.get("r", settings.get("risk_free_rate")), settings.get("q", settings.get("dividend_yield"))
    if r is None or q is None:
        on = None
        if target_month is not None:
            on = date(*target_month, 1) - timedelta(days=1)
        try:
            entry = lookup_rates(series.instrument, on)
        except KeyError:
            raise CliError(f"no rate-book entry for {series.instrument!r}; pass --r and --q")
        r = entry.risk_free_rate if r is None else r
        q = entry.dividend_yield if q is None else q
    settings.update(risk_free_rate=r, dividend_yield=q)
    if "sigma" in settings:
        settings["volatility_override"] = settings["sigma"]
    settings.pop("r", None)
    settings.pop("q", None)
    return MarketConfig.from_mapping(settings)


def _load(args):
    settings = _settings(args)
    return load_price_series(args.data, instrument=settings.get("instrument"), date_format=settings.get("date_format"))


def _echo(args, out_dir: Path, **extra) -> None:
    """Config echo of every effective value; no timestamps so reruns are byte-identical."""
    settings = {k: (v.isoformat() if isinstance(v, date) else v) for k, v in _settings(args).items()}
    settings.update(extra)
    write_atomic(out_dir / f"run_config_{args.command}.json", json.dumps(settings, indent=2, sort_keys=True, default=str) + "\n")


# --- commands ------------------------------------------------------------------


def cmd_ingest(args, out: Path) -> None:
    series = _load(args)
    print(f"instrument: {series.instrument}")
    print(f"rows: {len(series)}")
    print(f"dropped: {series.dropped}")
    print(f"range: {series.dates[0].isoformat()} .. {series.dates[-1].isoformat()}")
    path = write_atomic(out / f"{series.instrument or 'series'}_canonical.csv", series.to_csv())
    print(f"wrote {path}")
    _echo(args, out, rows=len(series), dropped=series.dropped)


def cmd_volatility(args, out: Path) -> None:
    series = _load(args)
    ledger = annual_volatility(series, args.target_month)
    for (y, m), s in ledger.months:
        print(f"{date(y, m, 1):%B %Y}\t{_fmt(s)}")
    print(f"Sum\t{_fmt(ledger.sigma_annual)}")
    write_atomic(out / f"volatility_{_ym(args.target_month)}.csv", ledger.to_csv())
    if args.trend:
        print()
        for ym, s, flagged in volatility_trend(series, args.window, args.spike_ratio):
            print(f"{_ym(ym)}\t{_fmt(s)}" + ("\tSPIKE" if flagged else ""))
    _echo(args, out, instrument=series.instrument, sigma_annual=ledger.sigma_annual)


def cmd_forecast(args, out: Path) -> None:
    series = _load(args)
    config = _market_config(args, series, args.target_month)
    reports = rolling_forecast(series, args.target_month, args.horizon, config)
    for report in reports:
        stem = f"forecast_{series.instrument or 'series'}_{_ym(report.target_month)}"
        write_atomic(out / f"{stem}.csv", report.to_csv())
        write_atomic(out / f"{stem}.json", report.to_json())
        print(f"{_ym(report.target_month)}: {len(report.rows)} rows, sigma {_fmt(report.sigma)}, mean drift {_fmt(report.mean_drift)} ({report.target_dates_source} dates)")
    if args.explain:
        for report in reports:
            if any(r.target_date == args.explain for r in report.rows):
                print()
                print(report.explain(args.explain), end="")
                break
        else:
            raise CliError(f"--explain date {args.explain} is not among the forecast dates")
    _echo(args, out, instrument=series.instrument, market_config=asdict(config))


def cmd_price(args, out: Path) -> None:
    if args.K is None and args.mean is None:
        raise CliError("give --K or --mean")
    K = args.K if args.K is not None else strike_price(args.S, args.mean)
    if args.T is None and args.day_index is None:
        raise CliError("give --T or --day-index")
    config = MarketConfig(year_length=args.year_length, time_rounding=args.time_rounding)
    T = args.T if args.T is not None else time_fraction(args.day_index, config)
    inputs = PricingInputs(args.S, K, args.r, args.q, args.sigma, T)
    quote = price_options(inputs)
    rows = [("S", args.S)]
    if args.mean is not None:
        rows += [("mean", args.mean), ("e^mean", K / args.S)]
    rows += [
        ("K", K),
        ("T", T),
        ("r", args.r),
        ("q", args.q),
        ("sigma", args.sigma),
        ("d1", quote.d1),
        ("d2", quote.d2),
        ("N(d1)", std_normal_cdf(quote.d1)),
        ("N(d2)", std_normal_cdf(quote.d2)),
        ("N(-d1)", std_normal_cdf(-quote.d1)),
        ("N(-d2)", std_normal_cdf(-quote.d2)),
        ("call", quote.call),
        ("put", quote.put),
        ("predicted_close", quote.predicted_close),
    ]
    for name, value in rows:
        print(f"{name:<16}{_fmt(value)}")
    _echo(args, out, K=K, T=T)


def _dataset(series, profile):
    _, attributes = PROFILES[profile]
    return windowize(series, 1, 1, 1, attributes)


def _partition(data, args):
    if getattr(args, "ratio", None) is not None:
        return split_linear(data, args.ratio)
    until = getattr(args, "train_until", None)
    test_month = getattr(args, "test_month", None)
    if until is None and test_month is not None:
        until = date(*test_month, 1) - timedelta(days=1)
    if until is None:
        raise CliError("give --train-until, --test-month or --ratio")
    train = data.where_ids(end=until)
    if test_month is not None:
        y, m = test_month
        nxt = date(y + (m == 12), m % 12 + 1, 1)
        test = data.where_ids(start=date(y, m, 1), end=nxt - timedelta(days=1))
    else:
        test = data.where_ids(start=until + timedelta(days=1))
    if len(train) == 0 or len(test) == 0:
        raise CliError(f"empty partition: {len(train)} training rows, {len(test)} test rows")
    return train, test


def cmd_train(args, out: Path) -> None:
    series = _load(args)
    data = _dataset(series, args.profile)
    train, test = _partition(data, args)
    model = make_learner(PROFILES[args.profile][0], args.seed)(train)
    meta = {"profile": args.profile, "instrument": series.instrument, "seed": args.seed, "train_rows": len(train), "train_end": train.ids[-1].isoformat()}
    path = write_atomic(Path(args.model) if args.model else out / f"model_{args.profile}.json", dumps_model(model, **meta))
    print(f"trained {args.profile} on {len(train)} rows ({train.ids[0]} .. {train.ids[-1]}); wrote {path}")
    if args.validate:
        result = sliding_window_validate(train, PROFILES[args.profile][0], seed=args.seed)
        print(result.format())
    _echo(args, out, instrument=series.instrument, train_rows=len(train))


def _read_model(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read model {path}: {exc}")
    doc = json.loads(text)
    return loads_model(text), doc.get("metadata", {})


def cmd_evaluate(args, out: Path) -> None:
    series = _load(args)
    model, meta = _read_model(args.model)
    profile = meta.get("profile")
    if args.profile and profile and args.profile != profile:
        raise CliError(f"model was trained with profile {profile!r}, not {args.profile!r}")
    profile = args.profile or profile
    if profile not in PROFILES:
        raise CliError("cannot tell the model's profile; pass --profile")
    data = _dataset(series, profile)
    if args.on_train:
        end = date.fromisoformat(meta["train_end"])
        test = data.where_ids(end=end)
    else:
        _, test = _partition(data, args)
    metrics = regression_metrics(model.predict(test), test.y)
    print(f"{profile} on {len(test)} rows ({test.ids[0]} .. {test.ids[-1]})")
    print(metrics.format())
    write_atomic(out / f"metrics_{profile}.json", json.dumps(metrics.to_dict(), indent=2) + "\n")
    _echo(args, out, instrument=series.instrument, profile=profile)


def cmd_compare(args, out: Path) -> None:
    series = _load(args)
    config = _market_config(args, series, args.test_month)
    report = forecast_month(series, args.test_month, config)
    ml = {}
    for path in args.model or []:
        model, meta = _read_model(path)
        profile = meta.get("profile")
        if profile not in PROFILES:
            raise CliError(f"model {path} carries no usable profile")
        data = _dataset(series, profile)
        y, m = args.test_month
        test = data.where_ids(start=date(y, m, 1), end=date(y + (m == 12), m % 12 + 1, 1) - timedelta(days=1))
        if len(test) == 0:
            raise CliError(f"no {profile} rows in {_ym(args.test_month)}")
        ml[profile] = (test.ids, model.predict(test).tolist())
    comparison = comparison_report(slice_month(series, *args.test_month), report, ml)
    stem = f"compare_{series.instrument or 'series'}_{_ym(args.test_month)}"
    write_atomic(out / f"{stem}.csv", comparison.to_csv())
    write_atomic(out / f"{stem}.json", comparison.to_json({"market": asdict(config), "models": list(args.model or [])}))
    print(comparison.format(), end="")
    _echo(args, out, instrument=series.instrument, market_config=asdict(config))


# --- parser --------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frontier-bsm", description=__doc__)
    parser.add_argument("--config", help="flat key=value file of defaults")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="out")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("data", help="delimited OHLCV file")
        p.add_argument("--instrument")
        p.add_argument("--date-format")
        return p

    def market_flags(p):
        p.add_argument("--r", type=float, help="risk-free rate (decimal); default from the rate book")
        p.add_argument("--q", type=float, help="dividend yield (decimal); default from the rate book")
        p.add_argument("--year-length", type=int)
        p.add_argument("--time-rounding", choices=("exact", "round3"))
        p.add_argument("--anchor", choices=("year", "window"))
        p.add_argument("--freeze-time", action="store_const", const=True)
        p.add_argument("--sigma", type=float, help="override the derived volatility sum")

    p = data_cmd("ingest", "validate a price file and write its canonical CSV")
    p.set_defaults(func=cmd_ingest)

    p = data_cmd("volatility", "twelve trailing monthly close std devs and their sum")
    p.add_argument("--target-month", type=_month, required=True)
    p.add_argument("--trend", action="store_true", help="also flag volatility spikes")
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--spike-ratio", type=float, default=2.0)
    p.set_defaults(func=cmd_volatility)

    p = data_cmd("forecast", "forecast a month (or chain several) of closes")
    p.add_argument("--target-month", type=_month, required=True)
    p.add_argument("--horizon", type=int, default=1)
    p.add_argument("--explain", type=_date, help="print the full worksheet for one target date")
    market_flags(p)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("price", help="one-shot call/put/average for given inputs")
    p.add_argument("--S", type=float, required=True)
    p.add_argument("--K", type=float)
    p.add_argument("--mean", type=float, help="mean daily log change; K = S * e^mean")
    p.add_argument("--T", type=float)
    p.add_argument("--day-index", type=int)
    p.add_argument("--year-length", type=int, default=261)
    p.add_argument("--time-rounding", choices=("exact", "round3"), default="round3")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.set_defaults(func=cmd_price)

    def split_flags(p):
        p.add_argument("--train-until", type=_date)
        p.add_argument("--test-month", type=_month)
        p.add_argument("--ratio", type=float, help="linear split ratio (e.g. 0.6) instead of dates")

    p = data_cmd("train", "fit a baseline model")
    p.add_argument("--profile", choices=sorted(PROFILES), required=True)
    p.add_argument("--model", help="output model path (default OUT/model_<profile>.json)")
    p.add_argument("--validate", action="store_true", help="also run sliding-window validation on the training rows")
    split_flags(p)
    p.set_defaults(func=cmd_train)

    p = data_cmd("evaluate", "score a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--on-train", action="store_true", help="score on the model's own training rows")
    split_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = data_cmd("compare", "BSOPM vs saved models vs actual closes for one month")
    p.add_argument("--test-month", type=_month, required=True)
    p.add_argument("--model", action="append", help="saved model file (repeatable)")
    market_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        args.func(args, Path(args.out_dir))
    except (CliError, DataError, RankDeficientError, TrainingDiverged, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
