import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import pandas as pd

from src.bounds.bounds_engine import Regime, classify_regime
from src.bounds.thresholds import S_THRESHOLD_CASES, ThresholdQuery
from src.config.settings import settings
from src.data.market_data import log_returns
from src.models.core_model import (
    BoundWindow,
    LeverageSpec,
    LogReturnSeries,
    PriceSeries,
    exact_leveraged_logreturn,
    net_logreturn,
)
from src.utils.exceptions import DomainError
from src.utils.logger import app_logger
from src.utils.progress_bar import ProgressBar

BACKTEST_COLUMNS = [
    "start_date", "end_date", "n", "m1", "m2", "s", "index_logreturn", "leveraged_net",
    "in_window", "L0", "target", "s_max", "certified", "goal_held",
]


@dataclass(frozen=True)
class BacktestPlan:
    L: float
    r: float = 0.0
    window_days: int = 63
    l0_values: Sequence[float] = (0.0, 1.0)
    window: BoundWindow = BoundWindow(math.log(0.8), math.log(1.2))
    step: int = 1

    def __post_init__(self):
        if self.L == 1:
            raise DomainError("L = 1 tracks the index exactly; nothing to certify")
        if self.window_days < 1 or self.step < 1:
            raise DomainError(f"window_days and step must be positive, got {self.window_days}, {self.step}")

    def case(self) -> Optional[str]:
        """Threshold case used as the sufficient condition, or None in the GAP regime."""
        regime = classify_regime(self.L, self.window)
        return {
            Regime.ABOVE_ONE: "i",
            Regime.NEGATIVE: "ii",
            Regime.FRACTION_LOW: "under_a",
            Regime.FRACTION_HIGH: "under_b",
        }.get(regime)


def rolling_backtest(prices: PriceSeries, plan: BacktestPlan, use_tqdm: Optional[bool] = None) -> pd.DataFrame:
    """Check the sufficient conditions on every rolling window of ``window_days`` log-returns.

    Cases (i)/(ii) test L0 * index <= net leveraged return; for 0 < L < 1 the
    goal is leveraged <= index and ``L0`` is reported as 1.
    """
    use_tqdm = settings.logging_config.use_tqdm if use_tqdm is None else use_tqdm
    returns = log_returns(prices).values
    n = plan.window_days
    if len(returns) < n:
        raise DomainError(f"Series has {len(prices)} closes; a {n}-day window needs at least {n + 1}")

    case = plan.case()
    if case is None:
        app_logger.warning(f"L={plan.L} is in the GAP regime for this window; nothing can be certified")
    outperformance = not 0 < plan.L < 1
    slack = settings.verify_config.slack
    l0_values = list(plan.l0_values) if outperformance else [1.0]

    starts = list(range(0, len(returns) - n + 1, plan.step))
    rows: List[tuple] = []
    with ProgressBar(total=len(starts), desc="Rolling windows", use_tqdm=use_tqdm) as progress:
        for start in starts:
            chunk = LogReturnSeries(returns[start:start + n])
            stats = chunk.stats()
            index_return = float(chunk.values.sum())
            exact = exact_leveraged_logreturn(plan.L, chunk)
            net = net_logreturn(exact, n, plan.r) if outperformance else exact
            in_window = plan.window.contains(chunk.values)

            for L0 in l0_values:
                s_max = float("nan")
                certified = False
                if case is not None:
                    query = ThresholdQuery(LeverageSpec(plan.L, L0, plan.r), plan.window, stats.m1)
                    threshold = S_THRESHOLD_CASES[case](query)
                    if threshold.present:
                        s_max = threshold.s_max
                    certified = in_window and threshold.certifies(stats.s)
                if outperformance:
                    target = L0 * index_return
                    goal_held = net >= target - slack
                else:
                    target = index_return
                    goal_held = net <= target + slack
                if certified and not goal_held:
                    app_logger.warning(
                        f"Certified window starting {prices.dates[start]} missed its goal by {abs(net - target)}"
                    )
                rows.append((
                    prices.dates[start], prices.dates[start + n], n, stats.m1, stats.m2, stats.s,
                    index_return, net, in_window, L0, target, s_max, certified, goal_held,
                ))
            progress.update(1)

    frame = pd.DataFrame(rows, columns=BACKTEST_COLUMNS)
    certified = int(frame["certified"].sum())
    app_logger.info(f"Backtest: {len(starts)} windows, {certified} certified (window, L0) pairs")
    return frame
