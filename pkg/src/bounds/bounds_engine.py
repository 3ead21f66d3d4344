"""Optimized quadratic lower and upper bounds on multi-day leveraged log-returns.

Each regime pairs a lower and an upper quadratic envelope of
f(x) = log(1 + L (exp(x) - 1)) over the return window [y0, y1]. An envelope
passes through one window endpoint (its anchor) and touches f at a free
tangency point y; the bound is then optimized over y.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from src.config.settings import OptimizerConfig, settings
from src.models.core_model import (
    BoundDirection,
    BoundWindow,
    SeriesStats,
    _anchored_arrays,
    linear_bound,
)
from src.optimization.scalar_optimizer import OptimizeReport, maximize, minimize
from src.utils.exceptions import DomainError, GapRegimeError, UnitError
from src.utils.logger import app_logger


class Regime(str, Enum):
    ABOVE_ONE = "ABOVE_ONE"
    FRACTION_LOW = "FRACTION_LOW"
    FRACTION_HIGH = "FRACTION_HIGH"
    NEGATIVE = "NEGATIVE"
    UNIT = "UNIT"
    GAP = "GAP"

    @property
    def hypothesis(self) -> str:
        return _HYPOTHESES[self]


_HYPOTHESES = {
    Regime.ABOVE_ONE: "L > 1 and log(1 - 1/L) < y0",
    Regime.FRACTION_LOW: "0 < L < 1 and y1 < log(1/L - 1)",
    Regime.FRACTION_HIGH: "0 < L < 1 and log(1/L - 1) < y0",
    Regime.NEGATIVE: "L < 0 and y1 < log(1 - 1/L)",
    Regime.UNIT: "L = 1",
    Regime.GAP: "0 < L < 1 and y0 <= log(1/L - 1) <= y1 (no quadratic bound exists)",
}


@dataclass(frozen=True)
class SearchSide:
    """Tangency range (lo, hi) for one envelope; either end may be infinite.

    ``anchor`` is one of the ends. The other end is either the singular or
    inflection point of f, or unbounded.
    """
    anchor: float
    lo: float
    hi: float

    def contains(self, y: float) -> bool:
        return self.lo < y < self.hi


@dataclass(frozen=True)
class BoundResult:
    lower: float
    upper: float
    y_star_lower: float
    y_star_upper: float
    regime: Regime
    n: int
    linear: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


def classify_regime(L: float, window: BoundWindow) -> Regime:
    y0, y1 = window.y0, window.y1
    if L == 0:
        raise DomainError("Leverage multiple L must be nonzero")
    if L == 1:
        return Regime.UNIT
    if L > 1:
        if not math.log(1.0 - 1.0 / L) < y0:
            raise DomainError(
                f"Hypothesis '{Regime.ABOVE_ONE.hypothesis}' failed: "
                f"y0={y0} but log(1 - 1/L)={math.log(1.0 - 1.0 / L)}"
            )
        return Regime.ABOVE_ONE
    if L < 0:
        if not y1 < math.log(1.0 - 1.0 / L):
            raise DomainError(
                f"Hypothesis '{Regime.NEGATIVE.hypothesis}' failed: "
                f"y1={y1} but log(1 - 1/L)={math.log(1.0 - 1.0 / L)}"
            )
        return Regime.NEGATIVE
    inflection = math.log(1.0 / L - 1.0)
    if y1 < inflection:
        return Regime.FRACTION_LOW
    if y0 > inflection:
        return Regime.FRACTION_HIGH
    return Regime.GAP


def lower_side(regime: Regime, L: float, window: BoundWindow) -> SearchSide:
    y0, y1 = window.y0, window.y1
    if regime is Regime.ABOVE_ONE:
        return SearchSide(anchor=y0, lo=y0, hi=math.inf)
    if regime is Regime.FRACTION_LOW:
        return SearchSide(anchor=y0, lo=y0, hi=math.log(1.0 / L - 1.0))
    if regime is Regime.FRACTION_HIGH:
        return SearchSide(anchor=y1, lo=math.log(1.0 / L - 1.0), hi=y1)
    if regime is Regime.NEGATIVE:
        return SearchSide(anchor=y1, lo=-math.inf, hi=y1)
    raise _no_envelope(regime)


def upper_side(regime: Regime, L: float, window: BoundWindow) -> SearchSide:
    y0, y1 = window.y0, window.y1
    if regime is Regime.ABOVE_ONE:
        return SearchSide(anchor=y1, lo=math.log(1.0 - 1.0 / L), hi=y1)
    if regime is Regime.FRACTION_LOW:
        return SearchSide(anchor=y1, lo=-math.inf, hi=y1)
    if regime is Regime.FRACTION_HIGH:
        return SearchSide(anchor=y0, lo=y0, hi=math.inf)
    if regime is Regime.NEGATIVE:
        return SearchSide(anchor=y0, lo=y0, hi=math.log(1.0 - 1.0 / L))
    raise _no_envelope(regime)


def _no_envelope(regime: Regime) -> Exception:
    if regime is Regime.GAP:
        return GapRegimeError(f"No quadratic bound in the GAP regime: {regime.hypothesis}")
    return DomainError(f"Regime {regime.value} has no quadratic envelope")


def away_from_singularity(side: SearchSide, L: float, config: Optional[OptimizerConfig] = None) -> SearchSide:
    """Move a side's end at log(1 - 1/L) in to where 1 + L(e^y - 1) equals ``singular_floor``.

    Any tangency inside the side still gives a valid envelope.
    """
    if 0 < L <= 1:
        return side
    config = config or settings.optimizer_config
    singular = math.log(1.0 - 1.0 / L)
    floor_point = math.log1p((config.singular_floor - 1.0) / L)
    if side.lo == singular:
        return SearchSide(side.anchor, min(floor_point, 0.5 * (singular + side.anchor)), side.hi)
    if side.hi == singular:
        return SearchSide(side.anchor, side.lo, max(floor_point, 0.5 * (singular + side.anchor)))
    return side


def _finite_end(edge: float, anchor: float, config: OptimizerConfig) -> float:
    """Pull an open end inward: a small gap at the anchor, a relative epsilon elsewhere."""
    if edge == anchor:
        return config.anchor_gap * (1.0 + abs(anchor))
    return config.endpoint_eps * (1.0 + abs(edge))


def optimize_over_side(objective: Callable[[np.ndarray], np.ndarray], side: SearchSide,
                       maximizing: bool, config: Optional[OptimizerConfig] = None) -> OptimizeReport:
    """Optimize a vectorized objective of the tangency point over an open side.

    Infinite ends start ``initial_span`` away from the anchor and are pushed
    out geometrically while the optimum sits on that edge.
    """
    config = config or settings.optimizer_config
    optimize = maximize if maximizing else minimize

    lo_open = math.isinf(side.lo)
    hi_open = math.isinf(side.hi)
    lo = side.lo + _finite_end(side.lo, side.anchor, config) if not lo_open else None
    hi = side.hi - _finite_end(side.hi, side.anchor, config) if not hi_open else None
    limit = config.max_abs_tangency
    span = config.initial_span

    for extension in range(config.max_extensions + 1):
        search_lo = lo if lo is not None else max(side.anchor - span, -limit)
        search_hi = hi if hi is not None else min(side.anchor + span, limit)
        report = optimize(objective, search_lo, search_hi, tol=config.tolerance,
                          mesh_size=config.mesh_size, vectorized=True)
        at_open_edge = (lo_open and report.touches(search_lo) and search_lo > -limit) or \
                       (hi_open and report.touches(search_hi) and search_hi < limit)
        if not at_open_edge:
            return report
        span *= 2.0

    app_logger.warning(
        f"Tangency search stopped at the extension limit (anchor={side.anchor}, y*={report.argument})"
    )
    return report


def bound_objective(L: float, anchor: float, n: int, m1: float, variance: float):
    """n E[q(Y)] for the envelope q anchored at ``anchor`` and tangent at y.

    Expanded about the anchor: E[(Y - anchor)^2] = variance + (m1 - anchor)^2,
    so a constant series at the anchor evaluates to n f(anchor) for every y.
    """
    offset = m1 - anchor
    spread = variance + offset * offset

    def objective(y: np.ndarray) -> np.ndarray:
        f_anchor, anchor_slope, a, _ = _anchored_arrays(L, anchor, y)
        return n * (f_anchor + anchor_slope * offset + a * spread)
    return objective


def bound_interval(L: float, window: BoundWindow, stats: SeriesStats, n: Optional[int] = None,
                   config: Optional[OptimizerConfig] = None) -> BoundResult:
    """Optimized bounds on log(C_n^L / C_0) for any series in the window with these moments."""
    n = stats.n if n is None else n
    m1, m2, variance = stats.m1, stats.m2, stats.s * stats.s
    if m2 < m1 * m1 * (1.0 - 1e-12):
        raise DomainError(f"Inconsistent moments: m2={m2} < m1^2={m1 * m1}")
    if not window.y0 - 1e-15 <= m1 <= window.y1 + 1e-15:
        raise DomainError(f"Mean log-return {m1} lies outside the window [{window.y0}, {window.y1}]")

    regime = classify_regime(L, window)
    if regime is Regime.UNIT:
        raise UnitError(exact=n * m1)
    if regime is Regime.GAP:
        raise _no_envelope(regime)

    low = lower_side(regime, L, window)
    up = away_from_singularity(upper_side(regime, L, window), L, config)
    lower_report = optimize_over_side(bound_objective(L, low.anchor, n, m1, variance), low, True, config)
    upper_report = optimize_over_side(bound_objective(L, up.anchor, n, m1, variance), up, False, config)

    lower, upper = lower_report.value, upper_report.value
    linear = linear_bound(L, n, m1)
    if linear.direction is BoundDirection.UPPER:
        upper = min(upper, linear.value)
    else:
        lower = max(lower, linear.value)

    return BoundResult(
        lower=lower,
        upper=upper,
        y_star_lower=lower_report.argument,
        y_star_upper=upper_report.argument,
        regime=regime,
        n=n,
        linear=linear.value,
    )
