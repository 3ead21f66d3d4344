import math

import numpy as np
import pytest

from src.bounds.bounds_engine import (
    Regime,
    SearchSide,
    away_from_singularity,
    bound_interval,
    bound_objective,
    classify_regime,
    lower_side,
    optimize_over_side,
    upper_side,
)
from src.config.settings import OptimizerConfig
from src.models.core_model import (
    BoundWindow,
    LogReturnSeries,
    SeriesStats,
    daily_leveraged_logreturn,
    exact_leveraged_logreturn,
)
from src.utils.exceptions import DomainError, GapRegimeError, UnitError

WIDE = BoundWindow(math.log(0.8), math.log(1.2))
NARROW = BoundWindow(math.log(0.9), math.log(1.1))

# (L, window, regime, anchor of the lower envelope)
REGIME_CASES = [
    (2.0, NARROW, Regime.ABOVE_ONE, "y0"),
    (3.0, WIDE, Regime.ABOVE_ONE, "y0"),
    (0.3, WIDE, Regime.FRACTION_LOW, "y0"),
    (0.7, WIDE, Regime.FRACTION_HIGH, "y1"),
    (-3.0, WIDE, Regime.NEGATIVE, "y1"),
    (-2.0, NARROW, Regime.NEGATIVE, "y1"),
]


class TestClassifyRegime:
    def test_examples(self):
        assert classify_regime(2, BoundWindow(math.log(0.8), math.log(1.2))) is Regime.ABOVE_ONE
        assert classify_regime(0.5, BoundWindow(-0.3, 0.3)) is Regime.GAP
        assert classify_regime(-3, BoundWindow(math.log(0.9), math.log(1.15))) is Regime.NEGATIVE
        assert classify_regime(1, WIDE) is Regime.UNIT

    def test_fraction_sides(self):
        assert classify_regime(0.3, WIDE) is Regime.FRACTION_LOW
        assert classify_regime(0.7, WIDE) is Regime.FRACTION_HIGH

    def test_inadmissible_windows(self):
        with pytest.raises(DomainError, match="log\\(1 - 1/L\\) < y0"):
            classify_regime(2, BoundWindow(math.log(0.4), 0.1))
        with pytest.raises(DomainError, match="y1 < log\\(1 - 1/L\\)"):
            classify_regime(-3, BoundWindow(-0.1, math.log(1.5)))
        with pytest.raises(DomainError):
            classify_regime(0, WIDE)

    def test_sides_follow_regime_table(self):
        y0, y1 = WIDE.y0, WIDE.y1
        assert lower_side(Regime.ABOVE_ONE, 2.0, WIDE) == SearchSide(y0, y0, math.inf)
        assert upper_side(Regime.ABOVE_ONE, 2.0, WIDE) == SearchSide(y1, math.log(0.5), y1)
        assert lower_side(Regime.NEGATIVE, -3.0, WIDE) == SearchSide(y1, -math.inf, y1)
        assert upper_side(Regime.FRACTION_HIGH, 0.7, WIDE).hi == math.inf
        with pytest.raises(GapRegimeError):
            lower_side(Regime.GAP, 0.5, WIDE)


class TestBoundInterval:
    @pytest.mark.parametrize("L,window,regime,anchor", REGIME_CASES)
    def test_random_series_are_sandwiched(self, L, window, regime, anchor):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(1, 101))
            series = LogReturnSeries(rng.uniform(window.y0, window.y1, size=n))
            result = bound_interval(L, window, series.stats(), n)
            exact = exact_leveraged_logreturn(L, series)
            assert result.regime is regime
            assert result.lower <= result.upper
            assert result.lower - 1e-9 <= exact <= result.upper + 1e-9

    @pytest.mark.parametrize("L,window,regime,anchor", REGIME_CASES)
    def test_constant_series_at_anchor_is_exact(self, L, window, regime, anchor):
        y = window.y0 if anchor == "y0" else window.y1
        n = 17
        series = LogReturnSeries(np.full(n, y))
        result = bound_interval(L, window, series.stats(), n)
        assert result.lower == pytest.approx(n * daily_leveraged_logreturn(L, y), abs=1e-10 * n)

    @pytest.mark.parametrize("low,high", [(0.9, 1.1), (0.8, 1.2), (0.7, 1.3)])
    @pytest.mark.parametrize("L", [2.0, 3.0, -2.0, -3.0, 0.3, 0.8])
    @pytest.mark.parametrize("edge", ["y0", "y1"])
    @pytest.mark.parametrize("n", [1, 100])
    def test_constant_series_at_either_edge(self, low, high, L, edge, n):
        window = BoundWindow(math.log(low), math.log(high))
        y = window.y0 if edge == "y0" else window.y1
        series = LogReturnSeries(np.full(n, y))
        result = bound_interval(L, window, series.stats(), n)
        exact = exact_leveraged_logreturn(L, series)
        assert result.lower - 1e-9 <= exact <= result.upper + 1e-9
        assert result.width <= 1e-6 * n

    @pytest.mark.parametrize("L,window,regime,anchor", REGIME_CASES)
    def test_tangency_tightness(self, L, window, regime, anchor):
        y_bar = 0.5 * (window.y0 + window.y1) + 0.01
        n = 20
        series = LogReturnSeries(np.full(n, y_bar))
        result = bound_interval(L, window, series.stats(), n)
        assert result.lower == pytest.approx(exact_leveraged_logreturn(L, series), abs=1e-10 * n)
        assert result.y_star_lower == pytest.approx(y_bar, abs=1e-3)

    def test_fraction_high_example(self):
        window = BoundWindow(0.05, 0.2)
        stats = SeriesStats.from_values([0.1] * 5)
        result = bound_interval(0.5, window, stats, 5)
        exact = 5 * math.log(1 + 0.5 * math.expm1(0.1))
        assert result.regime is Regime.FRACTION_HIGH
        assert result.lower - 1e-9 <= exact <= result.upper + 1e-9

    def test_linear_bound_dominance(self):
        stats = SeriesStats.from_moments(0.002, 0.015, 30)
        above = bound_interval(2.0, WIDE, stats, 30)
        assert above.upper <= 2.0 * 30 * 0.002 + 1e-15
        negative = bound_interval(-2.0, NARROW, stats, 30)
        assert negative.upper <= -2.0 * 30 * 0.002 + 1e-15
        fraction = bound_interval(0.3, WIDE, stats, 30)
        assert fraction.lower >= 0.3 * 30 * 0.002 - 1e-15
        assert above.linear == pytest.approx(0.12)
        assert above.width >= 0 and negative.width >= 0

    def test_gap_regime(self):
        stats = SeriesStats.from_moments(0.0, 0.01, 10)
        with pytest.raises(GapRegimeError, match="GAP"):
            bound_interval(0.5, BoundWindow(-0.3, 0.3), stats, 10)

    def test_unit_leverage_reports_exact(self):
        stats = SeriesStats.from_moments(0.001, 0.01, 10)
        with pytest.raises(UnitError) as info:
            bound_interval(1.0, WIDE, stats, 10)
        assert info.value.exact == pytest.approx(0.01)

    def test_mean_outside_window(self):
        stats = SeriesStats.from_moments(0.5, 0.0, 3)
        with pytest.raises(DomainError):
            bound_interval(2.0, WIDE, stats, 3)

    def test_finer_mesh_never_worse(self):
        stats = SeriesStats.from_moments(0.0004, 0.012, 63)
        coarse = bound_interval(2.0, WIDE, stats, 63, OptimizerConfig(mesh_size=257))
        fine = bound_interval(2.0, WIDE, stats, 63, OptimizerConfig(mesh_size=1025))
        assert fine.lower >= coarse.lower - 1e-12
        assert fine.upper <= coarse.upper + 1e-12

    def test_tangency_points_inside_sides(self):
        stats = SeriesStats.from_moments(-0.001, 0.02, 50)
        result = bound_interval(-3.0, WIDE, stats, 50)
        assert result.y_star_lower < WIDE.y1
        assert WIDE.y0 < result.y_star_upper < math.log(4 / 3)


class TestAwayFromSingularity:
    def test_shrinks_singular_ends(self):
        above = away_from_singularity(upper_side(Regime.ABOVE_ONE, 2.0, WIDE), 2.0, OptimizerConfig())
        assert above.lo == pytest.approx(math.log1p(-0.999 / 2.0))
        assert above.lo > math.log(0.5) and above.hi == WIDE.y1
        negative = away_from_singularity(upper_side(Regime.NEGATIVE, -3.0, WIDE), -3.0, OptimizerConfig())
        assert WIDE.y1 < negative.hi < math.log(4 / 3)
        assert 1.0 - 3.0 * math.expm1(negative.hi) == pytest.approx(1e-3)

    def test_keeps_anchor_inside(self):
        window = BoundWindow(math.log(0.5001), math.log(0.5003))
        side = away_from_singularity(upper_side(Regime.ABOVE_ONE, 2.0, window), 2.0, OptimizerConfig())
        assert math.log(0.5) < side.lo < window.y1

    def test_objective_flat_for_constant_series_at_anchor(self):
        anchor = math.log(1.2)
        ys = np.linspace(math.log(0.5005), anchor - 1e-3, 200)
        values = bound_objective(2.0, anchor, 100, anchor, 0.0)(ys)
        assert np.allclose(values, 100 * daily_leveraged_logreturn(2.0, anchor), rtol=0, atol=1e-9)

    def test_other_sides_unchanged(self):
        side = upper_side(Regime.FRACTION_HIGH, 0.7, WIDE)
        assert away_from_singularity(side, 0.7) == side
        lower = lower_side(Regime.ABOVE_ONE, 2.0, WIDE)
        assert away_from_singularity(lower, 2.0) == lower


class TestOptimizeOverSide:
    def test_extends_unbounded_side(self):
        # Peak at 25 lies beyond the initial span of 10
        side = SearchSide(anchor=0.0, lo=0.0, hi=math.inf)
        report = optimize_over_side(lambda y: -(y - 25.0) ** 2, side, True)
        assert report.argument == pytest.approx(25.0, abs=1e-4)

    def test_stops_at_extension_limit(self):
        side = SearchSide(anchor=0.0, lo=-math.inf, hi=0.0)
        config = OptimizerConfig(max_extensions=1, max_abs_tangency=15.0)
        report = optimize_over_side(lambda y: -y, side, True, config)
        assert report.argument == pytest.approx(-15.0)
