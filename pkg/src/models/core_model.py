"""Return arithmetic of daily leveraged indexes.

Notation follows the usual leveraged-ETF setup: ``Y_i`` are daily log-returns
of the index, ``X_i = exp(Y_i) - 1`` its simple returns, and a daily leveraged
index with multiple ``L`` earns ``f(Y_i) = log(1 + L (exp(Y_i) - 1))`` per day.
"""

import math
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Sequence, Tuple, Union

import numpy as np

from src.config.settings import settings
from src.utils.exceptions import DegenerateError, DomainError

TRADING_DAYS = settings.market_config.trading_days
DEGENERATE_SEPARATION = 1e-9

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class LeverageSpec:
    L: float
    L0: float = 1.0
    r: float = 0.0

    def __post_init__(self):
        if self.L == 0:
            raise DomainError("Leverage multiple L must be nonzero")
        if self.r < 0:
            raise DomainError(f"Expense ratio must be non-negative, got {self.r}")

    def fee_per_period(self, periods_per_year: int = TRADING_DAYS) -> float:
        return math.log1p(self.r / periods_per_year)


@dataclass(frozen=True)
class PriceSeries:
    dates: Tuple[date, ...]
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        if len(self.dates) != len(closes):
            raise DomainError(f"{len(self.dates)} dates but {len(closes)} closes")
        if not np.all(closes > 0):
            bad = int(np.argmax(~(closes > 0)))
            raise DomainError(f"Close at position {bad} is not positive: {closes[bad]!r}")
        for i in range(1, len(self.dates)):
            if not self.dates[i] > self.dates[i - 1]:
                raise DomainError(f"Dates not strictly increasing at position {i}: {self.dates[i]}")
        closes.setflags(write=False)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", closes)

    def __len__(self) -> int:
        return len(self.closes)


@dataclass(frozen=True)
class LogReturnSeries:
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size < 1:
            raise DomainError("A log-return series needs at least one value")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def simple_returns(self) -> np.ndarray:
        """X_i, recomputed from Y_i on every access."""
        return np.expm1(self.values)

    def stats(self) -> "SeriesStats":
        return SeriesStats.from_values(self.values)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class SeriesStats:
    m1: float
    m2: float
    s: float
    n: int

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "SeriesStats":
        arr = np.asarray(values, dtype=float)
        if arr.size < 1:
            raise DomainError("Cannot summarize an empty series")
        m1 = float(np.mean(arr))
        m2 = float(np.mean(arr * arr))
        # Population variance m2 - m1^2, taken about the mean
        deviations = arr - m1
        variance = float(np.mean(deviations * deviations))
        return cls(m1=m1, m2=m2, s=math.sqrt(variance), n=int(arr.size))

    @classmethod
    def from_moments(cls, m1: float, s: float, n: int) -> "SeriesStats":
        if s < 0:
            raise DomainError(f"Standard deviation must be non-negative, got {s}")
        return cls(m1=m1, m2=s * s + m1 * m1, s=s, n=n)


@dataclass(frozen=True)
class BoundWindow:
    y0: float
    y1: float

    def __post_init__(self):
        if not self.y0 < self.y1:
            raise DomainError(f"Window needs y0 < y1, got y0={self.y0}, y1={self.y1}")

    @property
    def width(self) -> float:
        return self.y1 - self.y0

    def contains(self, values: ArrayLike) -> bool:
        arr = np.asarray(values, dtype=float)
        return bool(np.all((arr >= self.y0) & (arr <= self.y1)))


@dataclass(frozen=True)
class QuadCoefficients:
    a: float
    b: float
    c: float
    anchor: float
    tangency: float
    L: float

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return self.a * x * x + self.b * x + self.c

    def derivative(self, x: ArrayLike) -> ArrayLike:
        return 2.0 * self.a * x + self.b


class BoundDirection(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class LinearBound:
    value: float
    direction: BoundDirection


def admissible_y_interval(L: float) -> Tuple[float, float]:
    if L == 0:
        raise DomainError("Leverage multiple L must be nonzero")
    if L > 1:
        return math.log(1.0 - 1.0 / L), math.inf
    if L < 0:
        return -math.inf, math.log(1.0 - 1.0 / L)
    return -math.inf, math.inf


def _check_admissible(L: float, y: ArrayLike, what: str = "y") -> None:
    lo, hi = admissible_y_interval(L)
    arr = np.atleast_1d(np.asarray(y, dtype=float))
    bad = ~((arr > lo) & (arr < hi))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(
            f"{what}={arr[i]!r} gives a non-positive leveraged price for L={L}; "
            f"admissible log-returns lie in ({lo}, {hi})"
        )


def leveraged_price_ratio(L: float, y: ArrayLike) -> ArrayLike:
    """1 + L (exp(y) - 1), the one-day gross return of the leveraged index."""
    return 1.0 + L * np.expm1(y)


def daily_leveraged_logreturn(L: float, y: ArrayLike) -> ArrayLike:
    _check_admissible(L, y)
    if L == 1:
        return float(y) if np.ndim(y) == 0 else np.array(y, dtype=float)
    ratio = leveraged_price_ratio(L, y)
    if np.any(ratio <= 0):
        raise DomainError(f"Leveraged price ratio is non-positive for L={L}, y={y!r}")
    result = np.log1p(L * np.expm1(y))
    return float(result) if np.ndim(result) == 0 else result


def rebalanced_logreturn(L: float, y: ArrayLike) -> ArrayLike:
    """Log-return of a portfolio rebalanced to L in the index and 1 - L in cash."""
    result = np.log((1.0 - L) + L * np.exp(y))
    return float(result) if np.ndim(result) == 0 else result


def leveraged_logreturn_derivatives(L: float, x: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Closed-form f', f'' and f''' of f(x) = log(1 + L (exp(x) - 1))."""
    ex = np.exp(x)
    d = 1.0 + L * np.expm1(x)
    first = L * ex / d
    second = (1.0 - L) * L * ex / (d * d)
    third = (1.0 - L) * L * (1.0 - L * (ex + 1.0)) * ex / (d * d * d)
    return first, second, third


def _anchored_arrays(L: float, anchor: float, y: ArrayLike) -> Tuple[float, ArrayLike, ArrayLike, ArrayLike]:
    """Vectorized anchor-centred form f(anchor) + s (x - anchor) + a (x - anchor)^2.

    Returns (f(anchor), s, a, slope) where slope = f'(y). No domain checks;
    callers keep anchor and y admissible and apart.
    """
    y = np.asarray(y, dtype=float)
    h = y - anchor
    ratio_y = 1.0 + L * np.expm1(y)
    slope = L * np.exp(y) / ratio_y
    f_anchor = math.log1p(L * math.expm1(anchor))

    # f(anchor) - f(y) + f'(y) h, written so both terms are second order in h
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        u = slope * np.expm1(-h)
        near = (np.log1p(u) - u) + slope * (np.expm1(-h) + h)
        far = (f_anchor - np.log1p(L * np.expm1(y))) + slope * h
    numerator = np.where((np.abs(h) <= 1.0) & (np.abs(u) <= 1.0), near, far)

    a = numerator / (h * h)
    return f_anchor, slope - 2.0 * a * h, a, slope


def _coefficient_arrays(L: float, anchor: float, y: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Vectorized (a, b, c) for a fixed anchor over tangency points y."""
    y = np.asarray(y, dtype=float)
    _, _, a, slope = _anchored_arrays(L, anchor, y)
    b = slope - 2.0 * a * y
    c = math.log1p(L * math.expm1(anchor)) - a * anchor * anchor - b * anchor
    return a, b, c


def quad_coefficients(L: float, anchor: float, tangency: float) -> QuadCoefficients:
    """Quadratic through (anchor, f(anchor)) touching f at the tangency point."""
    _check_admissible(L, anchor, "anchor")
    _check_admissible(L, tangency, "tangency")
    if abs(anchor - tangency) < DEGENERATE_SEPARATION:
        raise DegenerateError(
            f"Anchor {anchor!r} and tangency {tangency!r} are closer than {DEGENERATE_SEPARATION}"
        )
    a, b, c = _coefficient_arrays(L, anchor, tangency)
    return QuadCoefficients(a=float(a), b=float(b), c=float(c), anchor=anchor, tangency=tangency, L=L)


def quad_coefficients_origin(L: float, anchor: float) -> QuadCoefficients:
    """Closed form of quad_coefficients(L, anchor, 0): b = L and c = 0."""
    _check_admissible(L, anchor, "anchor")
    _check_admissible(L, 0.0, "tangency")
    if abs(anchor) < DEGENERATE_SEPARATION:
        raise DegenerateError(f"Anchor {anchor!r} coincides with the origin")
    f_anchor = math.log1p(L * math.expm1(anchor))
    a = (f_anchor / anchor - L) / anchor
    return QuadCoefficients(a=a, b=float(L), c=0.0, anchor=anchor, tangency=0.0, L=L)


def exact_leveraged_logreturn(L: float, series: LogReturnSeries) -> float:
    """log(C_n^L / C_0): the daily leveraged log-returns summed over the series."""
    lo, hi = admissible_y_interval(L)
    values = series.values
    bad = ~((values > lo) & (values < hi))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(
            f"Log-return at index {i} ({values[i]!r}) gives a non-positive leveraged price for L={L}"
        )
    if L == 1:
        return float(np.sum(values))
    return float(np.sum(np.log1p(L * np.expm1(values))))


def net_logreturn(gross: float, n: int, r: float) -> float:
    """Subtract n days of expense ratio r, compounded daily over 252 trading days."""
    return gross - n * math.log1p(r / TRADING_DAYS)


def linear_bound(L: float, n: int, m1: float) -> LinearBound:
    """L n m1 bounds the leveraged log-return from above unless 0 <= L <= 1."""
    direction = BoundDirection.LOWER if 0 <= L <= 1 else BoundDirection.UPPER
    return LinearBound(value=L * n * m1, direction=direction)
