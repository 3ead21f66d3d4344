from typing import Optional


class LeveragedBoundsError(Exception):
    """Base class for every error raised by the library."""


class DomainError(LeveragedBoundsError, ValueError):
    """An input lies outside the region where the return map or a bound is defined."""


class DegenerateError(DomainError):
    """Anchor and tangency points coincide numerically."""


class GapRegimeError(DomainError):
    """0 < L < 1 with log(1/L - 1) inside the return window: no quadratic bound exists."""


class UnitError(LeveragedBoundsError):
    """L = 1 needs no bounds; the exact log-return is attached."""

    def __init__(self, exact: float):
        super().__init__(f"L = 1 tracks the index exactly; log-return is {exact!r}")
        self.exact = exact


class NonFiniteError(LeveragedBoundsError, ArithmeticError):
    def __init__(self, abscissa: float, value: float):
        super().__init__(f"Objective returned {value!r} at x = {abscissa!r}")
        self.abscissa = abscissa
        self.value = value


class EmptySetError(LeveragedBoundsError, ValueError):
    pass


class ParseError(LeveragedBoundsError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        parts = [f"line {line}"] if line is not None else []
        if field:
            parts.append(f"field '{field}'")
        location = ", ".join(parts) or "header"
        super().__init__(f"{location}: {message}")
        self.line = line
        self.field = field


class OrderError(LeveragedBoundsError, ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TooShortError(LeveragedBoundsError, ValueError):
    pass


class GapError(LeveragedBoundsError, ValueError):
    def __init__(self, year: int):
        super().__init__(f"Missing record for year {year}")
        self.year = year
