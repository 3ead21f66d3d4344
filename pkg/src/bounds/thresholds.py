"""Sufficient-condition thresholds built on the optimized quadratic bounds.

Two families:

* m1/m2 ratio thresholds ``-a/(L - L0)`` from the origin-tangent quadratic;
* standard-deviation thresholds: the largest ``s`` for which one tangency
  point ``y`` already certifies the goal inequality, i.e. the supremum over
  ``y`` of ``sqrt(-m1^2 + ((L0 - b)/a) m1 - (c - fee)/a)``.

Cases (i) and (ii) certify ``L0 log(C_n/C_0) <= log(C_n^L/C_0)`` net of fees,
the two underperformance cases certify that a constant-mix portfolio with
``0 < L < 1`` does no better than the index.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.bounds.bounds_engine import (
    Regime,
    SearchSide,
    lower_side,
    optimize_over_side,
    upper_side,
)
from src.config.settings import OptimizerConfig, settings
from src.data.market_data import window_from_ratios
from src.models.core_model import (
    DEGENERATE_SEPARATION,
    BoundWindow,
    LeverageSpec,
    _coefficient_arrays,
    quad_coefficients_origin,
)
from src.utils.exceptions import DomainError, EmptySetError
from src.utils.logger import app_logger

VALID_PERIODS = (252, 52, 12, 4, 2, 1)
FRACTION_GRID = tuple(round(k / 100.0, 2) for k in range(1, 100))


@dataclass(frozen=True)
class ThresholdQuery:
    """Inputs of one threshold evaluation; ``m1`` is the mean per-period log-return."""
    spec: LeverageSpec
    window: BoundWindow
    m1: float
    periods_per_year: int = 252

    def __post_init__(self):
        if self.periods_per_year not in VALID_PERIODS:
            raise DomainError(
                f"periods_per_year must be one of {VALID_PERIODS}, got {self.periods_per_year}"
            )

    @classmethod
    def from_annual(cls, spec: LeverageSpec, window: BoundWindow, annual_m1: float,
                    schedule: str = "daily") -> "ThresholdQuery":
        """Build a query from an annualized mean log-return and a rebalancing schedule."""
        periods = settings.market_config.periods_per_year.get(schedule)
        if periods is None:
            raise DomainError(f"Unknown rebalancing schedule '{schedule}'")
        return cls(spec=spec, window=window, m1=annual_m1 / periods, periods_per_year=periods)

    @property
    def fee(self) -> float:
        return self.spec.fee_per_period(self.periods_per_year)

    @property
    def annual_m1(self) -> float:
        return self.m1 * self.periods_per_year


@dataclass(frozen=True)
class SThreshold:
    """``s_max`` is None (ABSENT) when no probed tangency gives a non-negative radicand."""
    s_max: Optional[float]
    y_star: float
    radicand: float

    @property
    def present(self) -> bool:
        return self.s_max is not None

    def certifies(self, s: float) -> bool:
        return self.s_max is not None and s <= self.s_max


@dataclass(frozen=True)
class FractionSets:
    window: BoundWindow
    S: Tuple[float, ...] = FRACTION_GRID
    S1: Tuple[float, ...] = field(init=False)
    S2: Tuple[float, ...] = field(init=False)

    def __post_init__(self):
        s1 = tuple(L for L in self.S if self.window.y1 < math.log(1.0 / L - 1.0))
        s2 = tuple(L for L in self.S if math.log(1.0 / L - 1.0) < self.window.y0)
        object.__setattr__(self, "S1", s1)
        object.__setattr__(self, "S2", s2)

    @classmethod
    def from_window(cls, window: BoundWindow) -> "FractionSets":
        return cls(window=window)

    def green_under_a(self) -> float:
        """Largest member of S1: L with y1 = log(1/L - 1), rounded down to a hundredth."""
        if not self.S1:
            raise EmptySetError(f"S1 is empty for window [{self.window.y0}, {self.window.y1}]")
        return self.S1[-1]

    def green_under_b(self) -> float:
        """Smallest member of S2: L with y0 = log(1/L - 1), rounded up to a hundredth."""
        if not self.S2:
            raise EmptySetError(f"S2 is empty for window [{self.window.y0}, {self.window.y1}]")
        return self.S2[0]

    def red_under_a(self, offset: float = 0.1) -> float:
        return max(round(self.green_under_a() - offset, 2), self.S1[0])

    def red_under_b(self, offset: float = 0.1) -> float:
        return min(round(self.green_under_b() + offset, 2), self.S2[-1])


def _origin_a(L: float, anchor: float) -> float:
    if abs(anchor) < DEGENERATE_SEPARATION:
        raise DomainError("The origin-tangent quadratic needs a nonzero anchor")
    return quad_coefficients_origin(L, anchor).a


def ratio_threshold_lower(L: float, L0: float, y0: float) -> float:
    """m1/m2 >= -a0/(L - L0) implies L0 log(C_n/C_0) <= log(C_n^L/C_0)."""
    if not L > 1:
        raise DomainError(f"Ratio threshold needs L > 1, got {L}")
    if not L0 < L:
        raise DomainError(f"Ratio threshold needs L0 < L, got L0={L0}, L={L}")
    if not math.log(1.0 - 1.0 / L) < y0 < 0:
        raise DomainError(f"Need log(1 - 1/L) < y0 < 0, got y0={y0} with L={L}")
    return -_origin_a(L, y0) / (L - L0)


def ratio_threshold_upper(L: float, L0: float, y1: float) -> float:
    """m1/m2 <= -a1/(L - L0) implies L0 log(C_n/C_0) >= log(C_n^L/C_0)."""
    if not L > 1:
        raise DomainError(f"Ratio threshold needs L > 1, got {L}")
    if not L0 < L:
        raise DomainError(f"Ratio threshold needs L0 < L, got L0={L0}, L={L}")
    if not y1 > 0:
        raise DomainError(f"Need y1 > 0, got y1={y1}")
    return -_origin_a(L, y1) / (L - L0)


def radicand_objective(L: float, anchor: float, m1: float, L0: float, fee: float):
    """Vectorized -m1^2 + ((L0 - b)/a) m1 - (c - fee)/a over tangency points."""
    def objective(y: np.ndarray) -> np.ndarray:
        a, b, c = _coefficient_arrays(L, anchor, y)
        return -m1 * m1 + ((L0 - b) / a) * m1 - (c - fee) / a
    return objective


def _origin_radicand(L: float, anchor: float, m1: float, L0: float, fee: float) -> float:
    q = quad_coefficients_origin(L, anchor)
    return -m1 * m1 + ((L0 - q.b) / q.a) * m1 - (q.c - fee) / q.a


def _sup_radicand(L: float, side: SearchSide, m1: float, L0: float, fee: float,
                  config: Optional[OptimizerConfig]) -> SThreshold:
    report = optimize_over_side(radicand_objective(L, side.anchor, m1, L0, fee), side, True, config)
    y_star, best = report.argument, report.value

    if side.contains(0.0) and abs(side.anchor) >= DEGENERATE_SEPARATION:
        at_origin = _origin_radicand(L, side.anchor, m1, L0, fee)
        if at_origin >= best:
            y_star, best = 0.0, at_origin

    s_max = math.sqrt(best) if best >= 0 else None
    return SThreshold(s_max=s_max, y_star=y_star, radicand=best)


def s_threshold_case_i(query: ThresholdQuery, config: Optional[OptimizerConfig] = None) -> SThreshold:
    """L > 1: s <= s_max guarantees L0 log(C_n/C_0) <= R_{n,r}^L."""
    spec = query.spec
    if not spec.L > 1:
        raise DomainError(f"Case (i) needs L > 1, got {spec.L}")
    if not math.log(1.0 - 1.0 / spec.L) < query.window.y0:
        raise DomainError(
            f"Hypothesis '{Regime.ABOVE_ONE.hypothesis}' failed: y0={query.window.y0}, L={spec.L}"
        )
    side = lower_side(Regime.ABOVE_ONE, spec.L, query.window)
    return _sup_radicand(spec.L, side, query.m1, spec.L0, query.fee, config)


def s_threshold_case_ii(query: ThresholdQuery, config: Optional[OptimizerConfig] = None) -> SThreshold:
    """L < 0: s <= s_max guarantees L0 log(C_n/C_0) <= R_{n,r}^L."""
    spec = query.spec
    if not spec.L < 0:
        raise DomainError(f"Case (ii) needs L < 0, got {spec.L}")
    if not query.window.y1 < math.log(1.0 - 1.0 / spec.L):
        raise DomainError(
            f"Hypothesis '{Regime.NEGATIVE.hypothesis}' failed: y1={query.window.y1}, L={spec.L}"
        )
    side = lower_side(Regime.NEGATIVE, spec.L, query.window)
    return _sup_radicand(spec.L, side, query.m1, spec.L0, query.fee, config)


def _check_fraction(L: float) -> None:
    if not 0 < L < 1:
        raise DomainError(f"Underperformance thresholds need 0 < L < 1, got {L}")


def s_threshold_under_a(query: ThresholdQuery, config: Optional[OptimizerConfig] = None) -> SThreshold:
    """0 < L < 1 below the inflection: s <= s_max guarantees log(C_n/C_0) >= log(C_n^L/C_0)."""
    L = query.spec.L
    _check_fraction(L)
    if not query.window.y1 < math.log(1.0 / L - 1.0):
        raise DomainError(
            f"Hypothesis '{Regime.FRACTION_LOW.hypothesis}' failed: y1={query.window.y1}, L={L}"
        )
    side = upper_side(Regime.FRACTION_LOW, L, query.window)
    return _sup_radicand(L, side, query.m1, 1.0, 0.0, config)


def s_threshold_under_b(query: ThresholdQuery, config: Optional[OptimizerConfig] = None) -> SThreshold:
    """0 < L < 1 above the inflection: s <= s_max guarantees log(C_n/C_0) >= log(C_n^L/C_0)."""
    L = query.spec.L
    _check_fraction(L)
    if not math.log(1.0 / L - 1.0) < query.window.y0:
        raise DomainError(
            f"Hypothesis '{Regime.FRACTION_HIGH.hypothesis}' failed: y0={query.window.y0}, L={L}"
        )
    side = upper_side(Regime.FRACTION_HIGH, L, query.window)
    return _sup_radicand(L, side, query.m1, 1.0, 0.0, config)


@dataclass(frozen=True)
class FractionMinimum:
    red: Optional[float]
    green: Optional[float]
    red_leverage: Optional[float]
    green_leverage: Optional[float]
    skipped: Tuple[float, ...]


def schedule_window(schedule: str) -> BoundWindow:
    limits = settings.market_config.schedule_windows.get(schedule)
    if limits is None:
        raise DomainError(f"Unknown rebalancing schedule '{schedule}'")
    return window_from_ratios(*limits)


def min_threshold_over_fractions(window: BoundWindow, m1: float, schedule: str = "daily",
                                 config: Optional[OptimizerConfig] = None) -> FractionMinimum:
    """Red curve: min of under_a over S1. Green curve: min of under_b over S2.

    ``m1`` is the per-period mean log-return of the schedule.
    """
    periods = settings.market_config.periods_per_year.get(schedule)
    if periods is None:
        raise DomainError(f"Unknown rebalancing schedule '{schedule}'")
    sets = FractionSets.from_window(window)
    if not sets.S1:
        raise EmptySetError(f"S1 is empty for window [{window.y0}, {window.y1}]")
    if not sets.S2:
        raise EmptySetError(f"S2 is empty for window [{window.y0}, {window.y1}]")

    skipped: List[float] = []

    def minimum(members, threshold_fn) -> Tuple[Optional[float], Optional[float]]:
        best: Optional[float] = None
        best_L: Optional[float] = None
        for L in members:
            query = ThresholdQuery(LeverageSpec(L=L), window, m1, periods)
            result = threshold_fn(query, config)
            if not result.present:
                skipped.append(L)
                continue
            if best is None or result.s_max < best:
                best, best_L = result.s_max, L
        return best, best_L

    red, red_L = minimum(sets.S1, s_threshold_under_a)
    green, green_L = minimum(sets.S2, s_threshold_under_b)
    if skipped:
        app_logger.warning(f"{schedule}: no threshold for L in {skipped} (radicand negative everywhere)")
    return FractionMinimum(red=red, green=green, red_leverage=red_L, green_leverage=green_L,
                           skipped=tuple(skipped))


S_THRESHOLD_CASES: Dict[str, object] = {
    "i": s_threshold_case_i,
    "ii": s_threshold_case_ii,
    "under_a": s_threshold_under_a,
    "under_b": s_threshold_under_b,
}
