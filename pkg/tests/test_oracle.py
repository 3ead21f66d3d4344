import math

import numpy as np
import pytest

from src.models.core_model import BoundWindow, daily_leveraged_logreturn
from src.utils.exceptions import DomainError
from src.verification.oracle import (
    REPORT_COLUMNS,
    TrialConfig,
    check_sandwich,
    check_threshold_implications,
    random_series,
    threshold_grid,
    two_point_series,
)

WIDE = BoundWindow(math.log(0.8), math.log(1.2))


class TestSeriesGenerators:
    def test_random_series_is_deterministic(self):
        first = random_series(WIDE, 50, 7)
        second = random_series(WIDE, 50, 7)
        assert np.array_equal(first.values, second.values)
        assert WIDE.contains(first.values)

    def test_random_series_mean(self):
        series = random_series(WIDE, 20_000, 1)
        midpoint = 0.5 * (WIDE.y0 + WIDE.y1)
        # Standard error of the mean is about 0.0015
        assert float(np.mean(series.values)) == pytest.approx(midpoint, abs=0.01)

    def test_two_point_alternates(self):
        series = two_point_series(WIDE, 0.0, 0.05, 4)
        assert series.values == pytest.approx([0.05, -0.05, 0.05, -0.05])

    def test_two_point_exact_moments(self):
        m1, s = math.log(0.9) / 63, 0.015
        series = two_point_series(WIDE, m1, s, 63)
        stats = series.stats()
        assert stats.m1 == pytest.approx(m1, abs=1e-15)
        assert stats.s == pytest.approx(s, rel=1e-9)
        assert len(set(series.values)) == 2

    def test_two_point_edge_cases(self):
        constant = two_point_series(WIDE, 0.01, 0.0, 5)
        assert np.all(constant.values == 0.01)
        assert two_point_series(WIDE, 0.0, 0.5, 10) is None
        assert two_point_series(WIDE, 0.5, 0.01, 10) is None


class TestTrialConfig:
    def test_rejects_zero_trials(self):
        with pytest.raises(DomainError):
            TrialConfig(trials=0)

    def test_rejects_bad_lengths(self):
        with pytest.raises(DomainError):
            TrialConfig(n_range=(5, 2))

    def test_threshold_grid_size(self):
        cases = list(threshold_grid(TrialConfig()))
        assert len(cases) >= 200
        assert {case.case for case in cases} == {"i", "ii", "under_a", "under_b"}


class TestSandwich:
    @pytest.fixture(scope="class")
    def report(self):
        return check_sandwich(TrialConfig(seed=3, trials=300), use_tqdm=False)

    def test_no_violations(self, report):
        assert report.passed
        assert list(report.frame.columns) == REPORT_COLUMNS
        assert len(report.frame) == 300

    def test_every_regime_exercised(self, report):
        assert set(report.regimes()) == {"ABOVE_ONE", "FRACTION_LOW", "FRACTION_HIGH", "NEGATIVE", "UNIT"}

    def test_constant_series_at_y0_are_exact(self, report):
        frame = report.frame
        anchored = frame[(frame["trial"] % 10 == 0) & frame["regime"].isin(["ABOVE_ONE", "FRACTION_LOW"])]
        assert len(anchored) > 0
        assert np.allclose(anchored["lower"], anchored["exact"], rtol=0, atol=1e-9)

    @pytest.mark.parametrize("kind,regimes", [
        (1, ["ABOVE_ONE", "FRACTION_LOW"]),
        (0, ["NEGATIVE", "FRACTION_HIGH"]),
    ])
    def test_constant_series_at_upper_anchor_are_exact(self, report, kind, regimes):
        frame = report.frame
        anchored = frame[(frame["trial"] % 10 == kind) & frame["regime"].isin(regimes)]
        assert set(anchored["regime"]) == set(regimes)
        assert np.allclose(anchored["upper"], anchored["exact"], rtol=0, atol=1e-9)

    def test_unit_rows_are_exact(self, report):
        unit = report.frame[report.frame["regime"] == "UNIT"]
        assert len(unit) > 0
        assert np.allclose(unit["lower"], unit["exact"], atol=1e-12)
        assert np.allclose(unit["upper"], unit["exact"], atol=1e-12)

    def test_csv_is_deterministic(self):
        config = TrialConfig(seed=9, trials=40)
        first = check_sandwich(config, use_tqdm=False).to_csv()
        second = check_sandwich(config, use_tqdm=False).to_csv()
        assert first == second
        assert first.splitlines()[0] == ",".join(REPORT_COLUMNS)

    def test_single_window(self):
        window = BoundWindow(math.log(0.9), math.log(1.1))
        report = check_sandwich(TrialConfig(trials=20, window=window, L_set=(2.0,)), use_tqdm=False)
        assert report.passed
        constant = report.frame[report.frame["trial"] == 0].iloc[0]
        assert constant["exact"] == pytest.approx(constant["n"] * daily_leveraged_logreturn(2.0, window.y0))


class TestThresholdImplications:
    def test_no_violations(self):
        report = check_threshold_implications(TrialConfig(seed=2, trials=1, series_per_query=2), use_tqdm=False)
        assert len(report.frame) > 0
        assert report.passed
        assert {"case_i", "case_ii", "case_under_a", "case_under_b"} <= set(report.regimes())
