import argparse
import csv
import io
import math
import os
import sys
from typing import List, Optional, Sequence

from src.analysis.backtest import BacktestPlan, rolling_backtest
from src.analysis.figures import SweepSpec, build_custom_sweep, build_figure, write_panels
from src.bounds.bounds_engine import bound_interval, classify_regime
from src.bounds.thresholds import (
    S_THRESHOLD_CASES,
    ThresholdQuery,
    ratio_threshold_lower,
    ratio_threshold_upper,
)
from src.config.settings import settings
from src.data.data_loader import load_price_csv, load_shiller_csv
from src.data.market_data import (
    SCHEDULES,
    SchedulePlan,
    annualized_mean,
    log_returns,
    real_return_summary,
    shiller_real_log_returns,
    subsample,
)
from src.models.core_model import (
    BoundWindow,
    LeverageSpec,
    exact_leveraged_logreturn,
    net_logreturn,
)
from src.utils.exceptions import LeveragedBoundsError, UnitError
from src.utils.logger import app_logger, setup_logger
from src.verification.oracle import TrialConfig, run_default_suite

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2

DEFAULT_Y0 = math.log(0.8)
DEFAULT_Y1 = math.log(1.2)


def _fmt(value) -> str:
    if value is None:
        return "ABSENT"
    if isinstance(value, float):
        return "" if math.isnan(value) else settings.format_number(value)
    return str(value)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(value) for value in row])
    return buffer.getvalue()


class LeveragedBoundsCLI:
    def __init__(self, out_dir: Optional[str] = None, use_tqdm: bool = True):
        self.out_dir = out_dir
        self.use_tqdm = use_tqdm
        self.settings = settings
        self.settings.logging_config.use_tqdm = use_tqdm
        app_logger.info("Leveraged bounds CLI initialized")

    def emit(self, text: str, filename: str) -> None:
        """CSV goes to ``out_dir/filename`` when an output directory is set, stdout otherwise."""
        if self.out_dir:
            os.makedirs(self.out_dir, exist_ok=True)
            path = os.path.join(self.out_dir, filename)
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
            print(f"Wrote {path}")
        else:
            sys.stdout.write(text)

    def bounds(self, args) -> int:
        window = BoundWindow(args.y0, args.y1)
        regime = classify_regime(args.leverage, window)
        series = log_returns(load_price_csv(args.input))
        stats = series.stats()
        n = series.n
        inside = window.contains(series.values)
        exact = exact_leveraged_logreturn(args.leverage, series) if inside else float("nan")

        try:
            result = bound_interval(args.leverage, window, stats, n)
            lower, upper = result.lower, result.upper
        except UnitError as e:
            lower = upper = e.exact

        r = args.expense
        print(f"regime: {regime.value} ({regime.hypothesis})")
        if not inside:
            print("note: some log-returns fall outside [y0, y1]; the bounds do not apply to this series")
        header = ["regime", "L", "n", "m1", "m2", "s", "exact", "lower", "upper",
                  "net_exact", "net_lower", "net_upper"]
        row = [regime.value, float(args.leverage), n, stats.m1, stats.m2, stats.s, exact, lower, upper,
               net_logreturn(exact, n, r), net_logreturn(lower, n, r), net_logreturn(upper, n, r)]
        self.emit(_csv_text(header, [row]), "bounds.csv")
        return EXIT_OK

    def threshold(self, args) -> int:
        header = ["mode", "case", "L", "L0", "r", "y0", "y1", "m1", "schedule", "threshold", "y_star"]
        if args.mode == "ratio":
            if args.bound == "lower":
                value = ratio_threshold_lower(args.leverage, args.l0, args.y0)
                y_star = 0.0
            else:
                value = ratio_threshold_upper(args.leverage, args.l0, args.y1)
                y_star = 0.0
            row = ["ratio", args.bound, float(args.leverage), float(args.l0), float(args.expense),
                   args.y0, args.y1, float("nan"), args.schedule, value, y_star]
        else:
            spec = LeverageSpec(args.leverage, args.l0, args.expense)
            window = BoundWindow(args.y0, args.y1)
            if args.m1 is not None:
                periods = SchedulePlan(args.schedule).periods_per_year
                query = ThresholdQuery(spec, window, args.m1, periods)
            elif args.annual_m1 is not None:
                query = ThresholdQuery.from_annual(spec, window, args.annual_m1, args.schedule)
            else:
                raise ValueError("s mode needs --m1 or --annual-m1")
            result = S_THRESHOLD_CASES[args.case](query)
            row = ["s", args.case, float(args.leverage), float(args.l0), float(args.expense),
                   args.y0, args.y1, query.m1, args.schedule, result.s_max, result.y_star]
        self.emit(_csv_text(header, [row]), "threshold.csv")
        return EXIT_OK

    def sweep(self, args) -> int:
        out_dir = self.out_dir or self.settings.output_config.output_dir
        if args.figure is not None:
            panels = build_figure(args.figure, self.use_tqdm)
            paths = write_panels(panels, out_dir, f"figure{args.figure}")
        else:
            if args.case is None or not args.leverage:
                raise ValueError("sweep needs --figure N, or --case with --leverage values")
            spec = SweepSpec(
                case=args.case,
                leverages=tuple(args.leverage),
                l0_values=tuple(args.l0),
                expenses=tuple(args.expense),
                y0=args.y0,
                y1=args.y1,
                schedule=args.schedule,
                axis=tuple(args.axis),
            )
            paths = write_panels([build_custom_sweep(spec, self.use_tqdm)], out_dir, "sweep")
        for path in paths:
            print(f"Wrote {path}")
        return EXIT_OK

    def backtest(self, args) -> int:
        prices = load_price_csv(args.input)
        plan = BacktestPlan(
            L=args.leverage,
            r=args.expense,
            window_days=args.window_days,
            l0_values=tuple(args.l0),
            window=BoundWindow(args.y0, args.y1),
            step=args.step,
        )
        frame = rolling_backtest(prices, plan, self.use_tqdm)
        text = frame.to_csv(index=False, float_format="%.10g", na_rep="", lineterminator="\n")
        self.emit(text, "backtest.csv")
        return EXIT_OK

    def verify(self, args) -> int:
        out_dir = self.out_dir or self.settings.output_config.output_dir
        os.makedirs(out_dir, exist_ok=True)
        config = TrialConfig.from_settings(seed=args.seed, trials=args.trials)
        reports = run_default_suite(config, self.use_tqdm)

        total = 0
        for report in reports:
            path = os.path.join(out_dir, f"verify_{report.name}.csv")
            report.to_csv(path)
            total += report.violations
            print(f"{report.name}: {len(report.frame)} checks, {report.violations} violations -> {path}")
        if total:
            app_logger.error(f"Verification found {total} violations")
            return EXIT_VIOLATION
        return EXIT_OK

    def ingest(self, args) -> int:
        if args.shiller:
            returns = shiller_real_log_returns(load_shiller_csv(args.shiller))
            rows = [(int(year), float(value)) for year, value in returns.items()]
            self.emit(_csv_text(["year", "real_log_return"], rows), "shiller_returns.csv")
            stats = real_return_summary(returns, args.start, args.end)
            print(f"mean={_fmt(stats.m1)} std={_fmt(stats.s)} years={stats.n}", file=sys.stderr)
            return EXIT_OK

        if not args.input:
            raise ValueError("ingest needs --input prices.csv or --shiller table.csv")
        plan = SchedulePlan(args.schedule)
        prices = subsample(load_price_csv(args.input), plan)
        rows = [(prices.dates[0].isoformat(), float(prices.closes[0]), float("nan"))]
        if len(prices) > 1:
            series = log_returns(prices)
            rows += [(day.isoformat(), float(close), float(y))
                     for day, close, y in zip(prices.dates[1:], prices.closes[1:], series.values)]
            stats = series.stats()
            print(f"mean={_fmt(stats.m1)} std={_fmt(stats.s)} periods={stats.n} "
                  f"annualized_mean={_fmt(annualized_mean(stats, plan))}", file=sys.stderr)
        self.emit(_csv_text(["date", "close", "log_return"], rows), f"prices_{args.schedule}.csv")
        return EXIT_OK


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def log_ratio(text: str) -> float:
    """Accepts a log-return, or a gross price ratio written as 'r0.8' for log(0.8)."""
    if text.startswith("r"):
        return math.log(float(text[1:]))
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leveraged-bounds",
        description="Quadratic bounds and thresholds for daily leveraged index returns",
    )
    parser.add_argument("--out", type=str, default=None, help="Directory for output CSV files")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized verification")
    parser.add_argument("--no-tqdm", action="store_true", help="Disable tqdm progress bars")
    parser.add_argument("--log-level", default=settings.logging_config.log_level,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", type=str, default=settings.logging_config.log_file)
    sub = parser.add_subparsers(dest="command", required=True)

    window_help = "log-return; prefix with 'r' for a price ratio, e.g. r0.8"

    bounds = sub.add_parser("bounds", help="Optimized bounds for a price series")
    bounds.add_argument("--leverage", type=float, required=True)
    bounds.add_argument("--y0", type=log_ratio, required=True, help=window_help)
    bounds.add_argument("--y1", type=log_ratio, required=True, help=window_help)
    bounds.add_argument("--input", type=str, required=True, help="CSV with date,adjusted_close")
    bounds.add_argument("--expense", type=float, default=0.0)

    threshold = sub.add_parser("threshold", help="m1/m2 ratio or standard-deviation threshold")
    threshold.add_argument("--mode", choices=["ratio", "s"], required=True)
    threshold.add_argument("--case", choices=sorted(S_THRESHOLD_CASES), default="i")
    threshold.add_argument("--bound", choices=["lower", "upper"], default="lower",
                           help="ratio mode: lower (anchor y0) or upper (anchor y1) threshold")
    threshold.add_argument("--leverage", type=float, required=True)
    threshold.add_argument("--l0", type=float, default=1.0)
    threshold.add_argument("--y0", type=log_ratio, default=DEFAULT_Y0, help=window_help)
    threshold.add_argument("--y1", type=log_ratio, default=DEFAULT_Y1, help=window_help)
    threshold.add_argument("--m1", type=float, default=None, help="Mean per-period log-return")
    threshold.add_argument("--annual-m1", type=float, default=None, help="Mean annual log-return")
    threshold.add_argument("--expense", type=float, default=0.0)
    threshold.add_argument("--schedule", choices=SCHEDULES, default="daily")

    sweep = sub.add_parser("sweep", help="Curve data for the threshold figures")
    sweep.add_argument("--figure", type=int, default=None, help="Figure number 1-8")
    sweep.add_argument("--case", choices=sorted(S_THRESHOLD_CASES), default=None)
    sweep.add_argument("--leverage", type=float, nargs="+", default=[])
    sweep.add_argument("--l0", type=float, nargs="+", default=[1.0])
    sweep.add_argument("--expense", type=float, nargs="+", default=[0.0])
    sweep.add_argument("--y0", type=log_ratio, default=DEFAULT_Y0, help=window_help)
    sweep.add_argument("--y1", type=log_ratio, default=DEFAULT_Y1, help=window_help)
    sweep.add_argument("--schedule", choices=SCHEDULES, default="daily")
    sweep.add_argument("--axis", type=float, nargs=3, default=[0.0, 0.2, 0.005],
                       metavar=("START", "STOP", "STEP"), help="Annualized m1 axis")

    backtest = sub.add_parser("backtest", help="Rolling-window check of the sufficient conditions")
    backtest.add_argument("--input", type=str, required=True)
    backtest.add_argument("--leverage", type=float, required=True)
    backtest.add_argument("--expense", type=float, default=0.0)
    backtest.add_argument("--window-days", type=positive_int, default=63)
    backtest.add_argument("--l0", type=float, nargs="+", default=[0.0, 1.0])
    backtest.add_argument("--y0", type=log_ratio, default=DEFAULT_Y0, help=window_help)
    backtest.add_argument("--y1", type=log_ratio, default=DEFAULT_Y1, help=window_help)
    backtest.add_argument("--step", type=positive_int, default=1)

    verify = sub.add_parser("verify", help="Randomized oracle verification")
    verify.add_argument("--trials", type=positive_int, default=settings.verify_config.trials)
    verify.add_argument("--seed", dest="verify_seed", type=int, default=None)

    ingest = sub.add_parser("ingest", help="Convert price or Shiller CSVs into log-return tables")
    ingest.add_argument("--input", type=str, default=None)
    ingest.add_argument("--schedule", choices=SCHEDULES, default="daily")
    ingest.add_argument("--shiller", type=str, nargs="?", const=settings.get_shiller_path(), default=None,
                        help="CSV with year,P,D,J (defaults to the configured Shiller export)")
    ingest.add_argument("--start", type=int, default=1871)
    ingest.add_argument("--end", type=int, default=2020)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logger("leveraged_bounds", args.log_file, args.log_level)
    if getattr(args, "verify_seed", None) is not None:
        args.seed = args.verify_seed

    cli = LeveragedBoundsCLI(out_dir=args.out, use_tqdm=not args.no_tqdm)
    handler = getattr(cli, args.command)
    try:
        return handler(args)
    except (LeveragedBoundsError, ValueError, OSError) as e:
        app_logger.error(f"Error running {args.command}: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
