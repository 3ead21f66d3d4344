"""Curve data for the threshold figures, written as ``x,value,series_label`` CSVs.

ABSENT thresholds are written as empty ``value`` cells.
"""

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.bounds.thresholds import (
    S_THRESHOLD_CASES,
    FractionSets,
    ThresholdQuery,
    min_threshold_over_fractions,
    ratio_threshold_lower,
    schedule_window,
)
from src.config.settings import settings
from src.data.market_data import SCHEDULES
from src.models.core_model import BoundWindow, LeverageSpec
from src.utils.exceptions import DomainError
from src.utils.logger import app_logger
from src.utils.progress_bar import ProgressBar

MAX_GRID_POINTS = 1_000_000
EXPENSES = (0.0, 0.0095)
LOWER_WINDOW_TOP = math.log(1.2)
UPPER_WINDOW_BOTTOM = math.log(0.8)


@dataclass(frozen=True)
class SweepSpec:
    """A custom s-threshold sweep over the annualized mean log-return axis."""
    case: str
    leverages: Tuple[float, ...]
    l0_values: Tuple[float, ...] = (1.0,)
    expenses: Tuple[float, ...] = (0.0,)
    y0: float = math.log(0.8)
    y1: float = math.log(1.2)
    schedule: str = "daily"
    axis: Tuple[float, float, float] = (0.0, 0.2, 0.005)

    def __post_init__(self):
        if self.case not in S_THRESHOLD_CASES:
            raise DomainError(f"Unknown threshold case '{self.case}'")
        start, stop, step = self.axis
        if not all(math.isfinite(v) for v in self.axis) or step <= 0 or stop < start:
            raise DomainError(f"Axis needs finite start <= stop and step > 0, got {self.axis}")
        if self.grid_size > MAX_GRID_POINTS:
            raise DomainError(f"Sweep has {self.grid_size} points, limit is {MAX_GRID_POINTS}")

    @property
    def x_values(self) -> np.ndarray:
        return axis_values(*self.axis)

    @property
    def grid_size(self) -> int:
        return len(self.x_values) * len(self.leverages) * len(self.l0_values) * len(self.expenses)


@dataclass
class FigurePanel:
    name: str
    frame: pd.DataFrame = field(default_factory=pd.DataFrame)

    def to_csv(self, path: str) -> None:
        self.frame.to_csv(path, index=False, float_format="%.10g", na_rep="", lineterminator="\n")


def axis_values(start: float, stop: float, step: float) -> np.ndarray:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def _label(**parts) -> str:
    return ",".join(f"{key}={value:g}" for key, value in parts.items())


def _s_value(case: str, spec: LeverageSpec, window: BoundWindow, annual: float,
             schedule: str = "daily") -> float:
    query = ThresholdQuery.from_annual(spec, window, annual, schedule)
    result = S_THRESHOLD_CASES[case](query)
    return result.s_max if result.present else float("nan")


def _curve_rows(xs: Sequence[float], label: str, evaluate: Callable[[float], float],
                progress: ProgressBar) -> List[Tuple[float, float, str]]:
    rows = []
    for x in xs:
        rows.append((float(x), evaluate(float(x)), label))
        progress.update(1)
    return rows


def _frame(rows, columns=("x", "value", "series_label")) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=list(columns))


def figure_ratio_thresholds(progress: ProgressBar) -> List[FigurePanel]:
    """m1/m2 threshold -a0/(L - L0) against the minimum daily percentage change."""
    xs = axis_values(-30.0, -1.0, 0.5)
    panels = []
    for L0 in (0.0, 1.0):
        rows = []
        for L in (2.0, 3.0):
            rows += _curve_rows(xs, _label(L=L, L0=L0),
                                lambda x: ratio_threshold_lower(L, L0, math.log1p(x / 100.0)), progress)
        panels.append(FigurePanel(f"L0={L0:g}", _frame(rows)))
    return panels


def figure_case_i(progress: ProgressBar) -> List[FigurePanel]:
    xs = axis_values(0.0, 0.2, 0.005)
    panels = []
    for L in (2.0, 3.0):
        for L0 in (0.0, 1.0, 1.5):
            rows = []
            for low in (0.8, 0.9):
                window = BoundWindow(math.log(low), LOWER_WINDOW_TOP)
                for r in EXPENSES:
                    spec = LeverageSpec(L, L0, r)
                    rows += _curve_rows(xs, _label(y0_ratio=low, r=r),
                                        lambda x: _s_value("i", spec, window, x), progress)
            panels.append(FigurePanel(f"L={L:g}_L0={L0:g}", _frame(rows)))
    return panels


def figure_case_ii(progress: ProgressBar) -> List[FigurePanel]:
    xs = axis_values(-0.5, 0.0, 0.0125)
    panels = []
    for L in (-2.0, -3.0):
        for L0 in (-1.0, -1.5):
            rows = []
            for high in (1.1, 1.15):
                window = BoundWindow(UPPER_WINDOW_BOTTOM, math.log(high))
                for r in EXPENSES:
                    spec = LeverageSpec(L, L0, r)
                    rows += _curve_rows(xs, _label(y1_ratio=high, r=r),
                                        lambda x: _s_value("ii", spec, window, x), progress)
            panels.append(FigurePanel(f"L={L:g}_L0={L0:g}", _frame(rows)))
    return panels


def _winner_rows(xs, case: str, pair: Tuple[float, float], l0_values, window: BoundWindow,
                 r: float, progress: ProgressBar):
    """Larger threshold of the two leverages per point, tagged with the winner."""
    first, second = pair
    rows = []
    for L0 in l0_values:
        for x in xs:
            a = _s_value(case, LeverageSpec(first, L0, r), window, float(x))
            b = _s_value(case, LeverageSpec(second, L0, r), window, float(x))
            a_key = -math.inf if math.isnan(a) else a
            b_key = -math.inf if math.isnan(b) else b
            if math.isnan(a) and math.isnan(b):
                value, winner = float("nan"), ""
            elif a_key >= b_key:
                value, winner = a, f"L={first:g}"
            else:
                value, winner = b, f"L={second:g}"
            rows.append((float(x), value, _label(L0=L0), winner))
            progress.update(1)
    return rows


def figure_two_vs_three(progress: ProgressBar) -> List[FigurePanel]:
    xs = axis_values(0.02, 0.2, 0.005)
    l0_values = [round(1.0 + 0.1 * k, 1) for k in range(11)]
    window = BoundWindow(math.log(0.8), LOWER_WINDOW_TOP)
    rows = _winner_rows(xs, "i", (2.0, 3.0), l0_values, window, 0.0095, progress)
    return [FigurePanel("L=2_vs_L=3", _frame(rows, ("x", "value", "series_label", "winner")))]


def figure_inverse_pair(progress: ProgressBar) -> List[FigurePanel]:
    xs = axis_values(-0.5, 0.0, 0.0125)
    l0_values = [round(-1.0 - 0.1 * k, 1) for k in range(6)]
    window = BoundWindow(UPPER_WINDOW_BOTTOM, math.log(1.15))
    rows = _winner_rows(xs, "ii", (-2.0, -3.0), l0_values, window, 0.0095, progress)
    return [FigurePanel("L=-2_vs_L=-3", _frame(rows, ("x", "value", "series_label", "winner")))]


def _fraction_figure(case: str, progress: ProgressBar) -> List[FigurePanel]:
    xs = axis_values(0.0, 0.2, 0.005)
    panels = []
    for schedule in SCHEDULES:
        window = schedule_window(schedule)
        sets = FractionSets.from_window(window)
        if case == "under_a":
            picks = (("green", sets.green_under_a()), ("red", sets.red_under_a()))
        else:
            picks = (("green", sets.green_under_b()), ("red", sets.red_under_b()))
        rows = []
        for colour, L in picks:
            spec = LeverageSpec(L)
            rows += _curve_rows(xs, f"{colour},L={L:g}",
                                lambda x: _s_value(case, spec, window, x, schedule), progress)
        panels.append(FigurePanel(schedule, _frame(rows)))
    return panels


def figure_under_a(progress: ProgressBar) -> List[FigurePanel]:
    return _fraction_figure("under_a", progress)


def figure_under_b(progress: ProgressBar) -> List[FigurePanel]:
    return _fraction_figure("under_b", progress)


def figure_fraction_minima(progress: ProgressBar) -> List[FigurePanel]:
    xs = axis_values(0.0, 0.2, 0.01)
    panels = []
    for schedule in SCHEDULES:
        window = schedule_window(schedule)
        periods = settings.market_config.periods_per_year[schedule]
        rows = []
        for x in xs:
            minimum = min_threshold_over_fractions(window, float(x) / periods, schedule)
            red = minimum.red if minimum.red is not None else float("nan")
            green = minimum.green if minimum.green is not None else float("nan")
            rows.append((float(x), red, "red"))
            rows.append((float(x), green, "green"))
            progress.update(1)
        panels.append(FigurePanel(schedule, _frame(rows)))
    return panels


FIGURES: Dict[int, Tuple[Callable[[ProgressBar], List[FigurePanel]], int]] = {
    1: (figure_ratio_thresholds, 2 * 2 * 59),
    2: (figure_case_i, 6 * 4 * 41),
    3: (figure_two_vs_three, 11 * 37),
    4: (figure_case_ii, 4 * 4 * 41),
    5: (figure_inverse_pair, 6 * 41),
    6: (figure_under_a, 6 * 2 * 41),
    7: (figure_under_b, 6 * 2 * 41),
    8: (figure_fraction_minima, 6 * 21),
}


def build_figure(number: int, use_tqdm: Optional[bool] = None) -> List[FigurePanel]:
    if number not in FIGURES:
        raise DomainError(f"Unknown figure {number}; choose 1-{max(FIGURES)}")
    use_tqdm = settings.logging_config.use_tqdm if use_tqdm is None else use_tqdm
    builder, points = FIGURES[number]
    app_logger.info(f"Building figure {number} data")
    with ProgressBar(total=points, desc=f"Figure {number}", use_tqdm=use_tqdm) as progress:
        return builder(progress)


def build_custom_sweep(spec: SweepSpec, use_tqdm: Optional[bool] = None) -> FigurePanel:
    use_tqdm = settings.logging_config.use_tqdm if use_tqdm is None else use_tqdm
    window = BoundWindow(spec.y0, spec.y1)
    xs = spec.x_values
    rows = []
    with ProgressBar(total=spec.grid_size, desc=f"Sweep case {spec.case}", use_tqdm=use_tqdm) as progress:
        for L in spec.leverages:
            for L0 in spec.l0_values:
                for r in spec.expenses:
                    leverage = LeverageSpec(L, L0, r)
                    rows += _curve_rows(xs, _label(L=L, L0=L0, r=r),
                                        lambda x: _s_value(spec.case, leverage, window, x, spec.schedule),
                                        progress)
    return FigurePanel(f"case_{spec.case}", _frame(rows))


def write_panels(panels: Sequence[FigurePanel], out_dir: str, prefix: str) -> List[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for panel in panels:
        path = os.path.join(out_dir, f"{prefix}_{panel.name}.csv")
        panel.to_csv(path)
        paths.append(path)
    app_logger.info(f"Wrote {len(paths)} CSV files to {out_dir}")
    return paths
