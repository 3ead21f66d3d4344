import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from src.config.settings import settings
from src.models.core_model import BoundWindow, LogReturnSeries, PriceSeries, SeriesStats
from src.utils.exceptions import DomainError, GapError, TooShortError
from src.utils.logger import app_logger

SCHEDULES = ("daily", "weekly", "monthly", "quarterly", "semiannual", "annual")


@dataclass(frozen=True)
class SchedulePlan:
    schedule: str
    periods_per_year: int = field(init=False)

    def __post_init__(self):
        periods = settings.market_config.periods_per_year.get(self.schedule)
        if periods is None:
            raise DomainError(f"Unknown rebalancing schedule '{self.schedule}'; expected one of {SCHEDULES}")
        object.__setattr__(self, "periods_per_year", periods)


@dataclass(frozen=True)
class ShillerRecord:
    """One row of the annual table: average close P, dividend D, January CPI J."""
    year: int
    P: float
    D: float
    J: float

    def __post_init__(self):
        if not self.P > 0:
            raise DomainError(f"Year {self.year}: P must be positive, got {self.P}")
        if not self.J > 0:
            raise DomainError(f"Year {self.year}: J must be positive, got {self.J}")
        if not self.D >= 0:
            raise DomainError(f"Year {self.year}: D must be non-negative, got {self.D}")


def log_returns(series: PriceSeries) -> LogReturnSeries:
    if len(series) < 2:
        raise TooShortError(f"Need at least two closes for a log-return, got {len(series)}")
    closes = series.closes
    return LogReturnSeries(np.log(closes[1:] / closes[:-1]))


def summarize(series: LogReturnSeries) -> SeriesStats:
    return series.stats()


def _period_keys(index: pd.DatetimeIndex, schedule: str) -> List[np.ndarray]:
    if schedule == "weekly":
        iso = index.isocalendar()
        return [iso["year"].to_numpy(), iso["week"].to_numpy()]
    if schedule == "monthly":
        return [index.year.to_numpy(), index.month.to_numpy()]
    if schedule == "quarterly":
        return [index.year.to_numpy(), index.quarter.to_numpy()]
    if schedule == "semiannual":
        return [index.year.to_numpy(), ((index.month - 1) // 6).to_numpy()]
    return [index.year.to_numpy()]


def subsample(series: PriceSeries, plan: SchedulePlan) -> PriceSeries:
    """Keep the last close of every calendar period (ISO weeks for ``weekly``)."""
    if len(series) == 0:
        raise TooShortError("Cannot subsample an empty price series")
    if plan.schedule == "daily":
        return series

    frame = pd.DataFrame({"close": series.closes}, index=pd.DatetimeIndex(pd.to_datetime(list(series.dates))))
    last = frame.groupby(_period_keys(frame.index, plan.schedule), sort=False).tail(1)
    app_logger.debug(f"Subsampled {len(series)} closes to {len(last)} {plan.schedule} closes")
    return PriceSeries(
        dates=tuple(ts.date() for ts in last.index),
        closes=last["close"].to_numpy(dtype=float),
    )


def shiller_real_log_returns(records: Iterable[ShillerRecord]) -> pd.Series:
    """Annual real log-returns log(((P[k+1] + D[k]) / P[k]) * (J[k] / J[k+1])), indexed by k."""
    rows = sorted(records, key=lambda record: record.year)
    if len(rows) < 2:
        raise TooShortError(f"Need at least two years of records, got {len(rows)}")
    for prev, cur in zip(rows, rows[1:]):
        if cur.year == prev.year:
            raise DomainError(f"Duplicate record for year {cur.year}")
        if cur.year != prev.year + 1:
            raise GapError(prev.year + 1)

    frame = pd.DataFrame([(r.year, r.P, r.D, r.J) for r in rows], columns=["year", "P", "D", "J"])
    frame = frame.set_index("year")
    gross = (frame["P"].shift(-1) + frame["D"]) / frame["P"] * (frame["J"] / frame["J"].shift(-1))
    returns = np.log(gross.iloc[:-1])
    returns.name = "real_log_return"
    return returns


def real_return_summary(returns: pd.Series, start: Optional[int] = None,
                        end: Optional[int] = None) -> SeriesStats:
    """Mean and population std of the annual real log-returns for years start..end inclusive."""
    selected = returns
    if start is not None:
        selected = selected[selected.index >= start]
    if end is not None:
        selected = selected[selected.index <= end]
    if selected.empty:
        raise TooShortError(f"No annual returns between {start} and {end}")
    stats = SeriesStats.from_values(selected.to_numpy(dtype=float))
    app_logger.info(
        f"Real log-return {selected.index.min()}-{selected.index.max()}: "
        f"mean={stats.m1:.6f}, std={stats.s:.6f} over {stats.n} years"
    )
    return stats


def annualized_mean(stats: SeriesStats, plan: SchedulePlan) -> float:
    return stats.m1 * plan.periods_per_year


def window_from_ratios(low_ratio: float, high_ratio: float) -> BoundWindow:
    """Log-return window from gross price-ratio limits, e.g. (0.8, 1.2)."""
    return BoundWindow(math.log(low_ratio), math.log(high_ratio))
