"""Brute-force checks of the bounds and threshold certificates.

Every trial builds an explicit return series, computes the exact leveraged
log-return by direct summation and compares it with what the bounds or the
thresholds claim. Violations are reported as data, never raised.
"""

import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.bounds.bounds_engine import Regime, bound_interval, classify_regime
from src.bounds.thresholds import (
    S_THRESHOLD_CASES,
    SThreshold,
    ThresholdQuery,
)
from src.config.settings import settings
from src.models.core_model import (
    BoundDirection,
    BoundWindow,
    LeverageSpec,
    LogReturnSeries,
    exact_leveraged_logreturn,
    linear_bound,
    net_logreturn,
)
from src.utils.exceptions import DomainError, UnitError
from src.utils.logger import app_logger
from src.utils.progress_bar import ProgressBar

REPORT_COLUMNS = ["trial", "regime", "L", "L0", "n", "m1", "s", "lower", "exact", "upper", "violation"]

DEFAULT_LEVERAGES = (2.0, 3.0, 0.2, 0.3, 0.7, 0.9, -2.0, -3.0, 1.0)
DEFAULT_WINDOWS = (
    BoundWindow(math.log(0.9), math.log(1.1)),
    BoundWindow(math.log(0.8), math.log(1.2)),
)


@dataclass
class TrialConfig:
    seed: int = 1
    trials: int = 10000
    n_range: Tuple[int, int] = (1, 100)
    window: Optional[BoundWindow] = None
    L_set: Tuple[float, ...] = DEFAULT_LEVERAGES
    L0_set: Tuple[float, ...] = (0.0, 1.0, 1.5)
    r_set: Tuple[float, ...] = (0.0, 0.0025, 0.0095)
    slack: float = 1e-9
    series_per_query: int = 4

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be at least 1, got {self.trials}")
        lo, hi = self.n_range
        if not 1 <= lo <= hi:
            raise DomainError(f"n_range must satisfy 1 <= lo <= hi, got {self.n_range}")
        if not self.L_set:
            raise DomainError("L_set is empty")

    @classmethod
    def from_settings(cls, seed: Optional[int] = None, trials: Optional[int] = None) -> "TrialConfig":
        verify = settings.verify_config
        return cls(
            seed=verify.seed if seed is None else seed,
            trials=verify.trials if trials is None else trials,
            n_range=verify.n_range,
            slack=verify.slack,
            series_per_query=verify.random_series_per_query,
        )

    @property
    def windows(self) -> Tuple[BoundWindow, ...]:
        return (self.window,) if self.window is not None else DEFAULT_WINDOWS


@dataclass
class VerificationReport:
    name: str
    frame: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=REPORT_COLUMNS))

    @property
    def violations(self) -> int:
        return int(self.frame["violation"].sum()) if len(self.frame) else 0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def regimes(self) -> List[str]:
        return sorted(set(self.frame["regime"]))

    def to_csv(self, path: Optional[str] = None) -> str:
        text = self.frame.to_csv(index=False, float_format="%.10g", na_rep="", lineterminator="\n")
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        return text


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, *stream])


def random_series(window: BoundWindow, n: int, seed) -> LogReturnSeries:
    """n draws uniform on [y0, y1]; ``seed`` is anything numpy accepts as a seed."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return LogReturnSeries(rng.uniform(window.y0, window.y1, size=n))


def _fit(value: float, lo: float, hi: float) -> Optional[float]:
    # Rounding can push an extremal value just past the window edge
    if value < lo:
        return lo if lo - value <= 1e-12 * (1.0 + abs(lo)) else None
    if value > hi:
        return hi if value - hi <= 1e-12 * (1.0 + abs(hi)) else None
    return value


def two_point_series(window: BoundWindow, m1: float, s: float, n: int) -> Optional[LogReturnSeries]:
    """Series of n values in {u, v} with mean m1 and population std s, or None if infeasible.

    k of the values equal v and n - k equal u. Among the count splits that keep
    u and v inside the window the most balanced one is used.
    """
    y0, y1 = window.y0, window.y1
    if s < 0 or n < 1 or not y0 <= m1 <= y1:
        return None
    if s == 0:
        return LogReturnSeries(np.full(n, m1))
    if s * s > (m1 - y0) * (y1 - m1) * (1.0 + 1e-12):
        return None

    # q = k / (n - k) must lie in [s^2 / (y1 - m1)^2, (m1 - y0)^2 / s^2]
    q_lo = (s / (y1 - m1)) ** 2 if y1 > m1 else math.inf
    q_hi = ((m1 - y0) / s) ** 2
    target = math.sqrt(q_lo * q_hi) if math.isfinite(q_lo) else math.inf
    best = None
    for k in range(1, n):
        q = k / (n - k)
        if not q_lo * (1.0 - 1e-12) <= q <= q_hi * (1.0 + 1e-12):
            continue
        distance = abs(math.log(q / target))
        if best is None or distance < best[0]:
            best = (distance, k)
    if best is None:
        return None

    k = best[1]
    p = k / n
    spread = s / math.sqrt(p * (1.0 - p))
    u = _fit(m1 - p * spread, y0, y1)
    v = _fit(m1 + (1.0 - p) * spread, y0, y1)
    if u is None or v is None:
        return None
    # Interleave so every prefix has close to the right share of v
    values = np.array([v if (i * k) % n < k else u for i in range(n)], dtype=float)
    return LogReturnSeries(values)


def _leverage_windows(config: TrialConfig) -> List[Tuple[float, BoundWindow, Regime]]:
    combos = []
    for window in config.windows:
        for L in config.L_set:
            try:
                regime = classify_regime(L, window)
            except DomainError as e:
                app_logger.warning(f"Skipping L={L}: {e}")
                continue
            if regime is Regime.GAP:
                app_logger.warning(f"Skipping L={L}: GAP regime for window [{window.y0}, {window.y1}]")
                continue
            combos.append((L, window, regime))
    if not combos:
        raise DomainError("No leverage in L_set has a bound for the configured windows")
    return combos


def _edge_mean(window: BoundWindow, edge: float, rng: np.random.Generator) -> float:
    """A mean within 5% of the window width from ``edge``."""
    offset = rng.uniform(0.0, 0.05) * window.width
    return edge + offset if edge == window.y0 else edge - offset


def _sandwich_series(window: BoundWindow, n: int, trial: int, rng: np.random.Generator) -> LogReturnSeries:
    """Series shape by trial % 10: constant at y0 (0) or y1 (1), two-point near y0 (2)
    or y1 (3), two-point anywhere (5), uniform draws otherwise."""
    kind = trial % 10
    if kind in (0, 1):
        return LogReturnSeries(np.full(n, window.y0 if kind == 0 else window.y1))
    if kind in (2, 3, 5):
        if kind == 5:
            m1 = rng.uniform(window.y0, window.y1)
        else:
            m1 = _edge_mean(window, window.y0 if kind == 2 else window.y1, rng)
        s = rng.uniform(0.0, 1.0) * math.sqrt((m1 - window.y0) * (window.y1 - m1))
        series = two_point_series(window, m1, s, n)
        if series is not None:
            return series
    return random_series(window, n, rng)


def check_sandwich(config: TrialConfig, use_tqdm: Optional[bool] = None) -> VerificationReport:
    """lower - slack <= exact <= upper + slack, plus the linear bound, trial by trial."""
    use_tqdm = settings.logging_config.use_tqdm if use_tqdm is None else use_tqdm
    combos = _leverage_windows(config)
    lo, hi = config.n_range
    rows = []

    app_logger.info(f"Sandwich check: {config.trials} trials over {len(combos)} leverage/window pairs")
    with ProgressBar(total=config.trials, desc="Sandwich trials", use_tqdm=use_tqdm) as progress:
        for trial in range(config.trials):
            L, window, regime = combos[trial % len(combos)]
            rng = _rng(config.seed, trial)
            n = int(rng.integers(lo, hi + 1))
            series = _sandwich_series(window, n, trial, rng)
            stats = series.stats()
            exact = exact_leveraged_logreturn(L, series)

            try:
                result = bound_interval(L, window, stats, n)
                lower, upper = result.lower, result.upper
            except UnitError as e:
                lower = upper = e.exact

            linear = linear_bound(L, n, stats.m1)
            if linear.direction is BoundDirection.UPPER:
                linear_ok = exact <= linear.value + config.slack
            else:
                linear_ok = exact >= linear.value - config.slack
            violation = not (lower - config.slack <= exact <= upper + config.slack) or not linear_ok
            if violation:
                app_logger.warning(
                    f"Sandwich violation in trial {trial}: L={L}, n={n}, lower={lower}, exact={exact}, upper={upper}"
                )
            rows.append((trial, regime.value, L, float("nan"), n, stats.m1, stats.s,
                         lower, exact, upper, violation))
            progress.update(1)

    report = VerificationReport("sandwich", pd.DataFrame(rows, columns=REPORT_COLUMNS))
    app_logger.info(f"Sandwich check finished with {report.violations} violations")
    return report


@dataclass(frozen=True)
class ImplicationCase:
    case: str
    query: ThresholdQuery
    series_window: BoundWindow


def _log_ratio_window(low: float, high: float) -> BoundWindow:
    return BoundWindow(math.log(low), math.log(high))


def threshold_grid(config: TrialConfig) -> Iterator[ImplicationCase]:
    """Queries across cases (i), (ii), under_a and under_b (at least 200 of them)."""
    for L in (2.0, 3.0):
        for L0 in config.L0_set:
            for r in (0.0, 0.0095):
                for low in (0.8, 0.9):
                    window = _log_ratio_window(low, 1.2)
                    for annual in (0.02, 0.0658, 0.1, 0.15):
                        query = ThresholdQuery.from_annual(LeverageSpec(L, L0, r), window, annual)
                        yield ImplicationCase("i", query, window)

    for L in (-2.0, -3.0):
        for L0 in (-1.0, -1.5):
            for r in (0.0, 0.0095):
                for high in (1.1, 1.15):
                    window = _log_ratio_window(0.8, high)
                    for annual in (252 * math.log(0.9) / 63, -0.2, -0.1, -0.05):
                        query = ThresholdQuery.from_annual(LeverageSpec(L, L0, r), window, annual)
                        yield ImplicationCase("ii", query, window)

    fraction_window = _log_ratio_window(0.8, 1.2)
    for schedule in ("daily", "weekly"):
        for annual in (0.0, 0.0658, 0.1, 0.15):
            for L in (0.1, 0.2, 0.3, 0.4):
                query = ThresholdQuery.from_annual(LeverageSpec(L), fraction_window, annual, schedule)
                yield ImplicationCase("under_a", query, fraction_window)
            for L in (0.6, 0.7, 0.8, 0.9, 0.99):
                query = ThresholdQuery.from_annual(LeverageSpec(L), fraction_window, annual, schedule)
                yield ImplicationCase("under_b", query, fraction_window)


def _shaped_series(window: BoundWindow, m1: float, s_cap: float, n: int,
                   rng: np.random.Generator) -> LogReturnSeries:
    """Random series with mean m1 and population std at most s_cap, inside the window."""
    half = 0.5 * min(m1 - window.y0, window.y1 - m1)
    draws = rng.uniform(m1 - half, m1 + half, size=n)
    deviations = draws - draws.mean()
    spread = float(np.sqrt(np.mean(deviations * deviations)))
    target = rng.uniform(0.0, 1.0) * s_cap
    scale = min(1.0, target / spread) if spread > 0 else 0.0
    return LogReturnSeries(m1 + scale * deviations)


def _goal(case: ImplicationCase, series: LogReturnSeries, slack: float):
    spec = case.query.spec
    n = series.n
    m1 = float(np.mean(series.values))
    exact = exact_leveraged_logreturn(spec.L, series)
    if case.case in ("i", "ii"):
        net = net_logreturn(exact, n, spec.r)
        required = spec.L0 * n * m1
        return required, net, float("nan"), net < required - slack
    allowed = float(np.sum(series.values))
    return float("nan"), exact, allowed, exact > allowed + slack


def check_threshold_implications(config: TrialConfig, use_tqdm: Optional[bool] = None) -> VerificationReport:
    """For every query with a threshold, series with s <= s_max must meet the goal inequality.

    Rows: ``lower`` holds the required minimum L0 n m1 for outperformance cases,
    ``upper`` the allowed maximum n m1 for underperformance cases, and ``exact``
    the realized (net) log-return of the leveraged index.
    """
    use_tqdm = settings.logging_config.use_tqdm if use_tqdm is None else use_tqdm
    cases = list(threshold_grid(config))
    lo, hi = config.n_range
    rows = []
    certified = 0

    app_logger.info(f"Threshold implication check over {len(cases)} queries")
    with ProgressBar(total=len(cases), desc="Threshold queries", use_tqdm=use_tqdm) as progress:
        for index, case in enumerate(cases):
            threshold: SThreshold = S_THRESHOLD_CASES[case.case](case.query)
            progress.update(1)
            m1 = case.query.m1
            if not threshold.present or not case.series_window.y0 < m1 < case.series_window.y1:
                continue
            certified += 1
            rng = _rng(config.seed, 1_000_000 + index)

            candidates = []
            for fraction in (1.0, 0.5):
                n = int(rng.integers(max(lo, 2), max(hi, 2) + 1))
                series = two_point_series(case.series_window, m1, fraction * threshold.s_max, n)
                if series is not None:
                    candidates.append(series)
            for _ in range(config.series_per_query):
                n = int(rng.integers(lo, hi + 1))
                candidates.append(_shaped_series(case.series_window, m1, threshold.s_max, n, rng))

            spec = case.query.spec
            for series in candidates:
                stats = series.stats()
                required, realized, allowed, violation = _goal(case, series, config.slack)
                if violation:
                    app_logger.warning(
                        f"Threshold violation ({case.case}): L={spec.L}, L0={spec.L0}, m1={m1}, "
                        f"s={stats.s} <= s_max={threshold.s_max}"
                    )
                rows.append((index, f"case_{case.case}", spec.L, spec.L0, series.n, stats.m1, stats.s,
                             required, realized, allowed, violation))

    report = VerificationReport("thresholds", pd.DataFrame(rows, columns=REPORT_COLUMNS))
    app_logger.info(
        f"Threshold check: {certified} certified queries, {len(rows)} series, {report.violations} violations"
    )
    return report


def run_default_suite(config: TrialConfig, use_tqdm: Optional[bool] = None) -> Sequence[VerificationReport]:
    return [check_sandwich(config, use_tqdm), check_threshold_implications(config, use_tqdm)]
