import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from src.optimization.scalar_optimizer import maximize, minimize
from src.utils.exceptions import DomainError, NonFiniteError


class TestMaximize:
    def test_increasing_objective_hits_right_end(self):
        report = maximize(lambda x: x, 0.0, 1.0, tol=1e-8)
        assert report.argmax == 1.0
        assert report.value == 1.0

    def test_sine_peak(self):
        report = maximize(math.sin, 0.0, 3.5, tol=1e-10)
        assert report.argmax == pytest.approx(math.pi / 2, abs=1e-6)
        assert report.value == pytest.approx(1.0, abs=1e-12)
        assert report.evaluations > 1024

    def test_value_is_objective_at_argument(self):
        g = lambda x: -(x - 0.123) ** 2 + math.cos(5 * x)
        report = maximize(g, -1.0, 1.0)
        assert report.value == g(report.argument)

    def test_vectorized_matches_scalar(self):
        scalar = maximize(lambda x: math.exp(-(x - 0.4) ** 2), -2.0, 2.0)
        vector = maximize(lambda xs: np.exp(-(xs - 0.4) ** 2), -2.0, 2.0, vectorized=True)
        assert vector.argument == pytest.approx(scalar.argument, abs=1e-6)
        assert vector.value == pytest.approx(scalar.value, abs=1e-12)

    def test_leftmost_tie(self):
        report = maximize(lambda x: 1.0, 0.0, 1.0)
        assert report.argument == 0.0

    def test_touches_edge(self):
        report = maximize(lambda x: x, 0.0, 1.0)
        assert report.touches(1.0)
        assert not report.touches(0.0)

    def test_non_finite_reports_abscissa(self):
        with pytest.raises(NonFiniteError) as info:
            maximize(lambda xs: np.where(xs > 0.5, np.nan, xs), 0.0, 1.0, vectorized=True)
        assert info.value.abscissa > 0.5

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            maximize(lambda x: x, 1.0, 1.0)
        with pytest.raises(DomainError):
            maximize(lambda x: x, 0.0, 1.0, tol=0.0)

    @hyp_settings(max_examples=50, deadline=None)
    @given(
        st.floats(min_value=-3.0, max_value=3.0),
        st.floats(min_value=0.5, max_value=20.0),
        st.integers(min_value=3, max_value=200),
    )
    def test_never_below_mesh(self, center, frequency, mesh_size):
        """Property: the result is at least the best mesh value."""
        g = lambda x: math.cos(frequency * (x - center)) - 0.1 * x * x
        report = maximize(g, -2.0, 2.0, mesh_size=mesh_size)
        mesh_best = max(g(float(x)) for x in np.linspace(-2.0, 2.0, mesh_size))
        assert report.value >= mesh_best


class TestMinimize:
    def test_parabola(self):
        report = minimize(lambda x: (x - 0.3) ** 2, -1.0, 1.0, tol=1e-10)
        assert report.argmin == pytest.approx(0.3, abs=1e-6)
        assert report.value == pytest.approx(0.0, abs=1e-12)
        assert not report.maximized

    def test_value_sign_restored(self):
        g = lambda x: math.cosh(x - 0.2) + 1.0
        report = minimize(g, -1.0, 1.0)
        assert report.value == g(report.argument)
        assert report.value == pytest.approx(2.0, abs=1e-12)
