"""Mesh-then-golden-section search for one-dimensional objectives.

A uniform mesh locates the best cell (leftmost on ties) and golden-section
search refines inside the two neighbouring mesh intervals. The returned value
is never below the best mesh value.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.config.settings import settings
from src.utils.exceptions import DomainError, NonFiniteError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0

Objective = Callable[[float], float]


@dataclass(frozen=True)
class OptimizeReport:
    argument: float
    value: float
    evaluations: int
    achieved_tolerance: float
    maximized: bool = True
    cell_width: float = 0.0

    @property
    def argmax(self) -> float:
        return self.argument

    @property
    def argmin(self) -> float:
        return self.argument

    def touches(self, edge: float) -> bool:
        """True when the optimum sits within one mesh cell of ``edge``."""
        return abs(self.argument - edge) <= self.cell_width


class _Evaluator:
    def __init__(self, objective: Callable, vectorized: bool, sign: float):
        self.objective = objective
        self.vectorized = vectorized
        self.sign = sign
        self.count = 0

    def mesh(self, xs: np.ndarray) -> np.ndarray:
        if self.vectorized:
            values = np.asarray(self.objective(xs), dtype=float)
        else:
            values = np.array([self.objective(float(x)) for x in xs], dtype=float)
        self.count += xs.size
        finite = np.isfinite(values)
        if not np.all(finite):
            i = int(np.argmax(~finite))
            raise NonFiniteError(float(xs[i]), float(values[i]))
        return self.sign * values

    def point(self, x: float) -> float:
        if self.vectorized:
            value = float(np.asarray(self.objective(np.array([x])), dtype=float)[0])
        else:
            value = float(self.objective(x))
        self.count += 1
        if not math.isfinite(value):
            raise NonFiniteError(x, value)
        return self.sign * value


def _search(evaluator: _Evaluator, lo: float, hi: float, tol: float, mesh_size: int):
    if not lo < hi:
        raise DomainError(f"Search interval needs lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    if mesh_size < 3:
        raise DomainError(f"Mesh needs at least 3 points, got {mesh_size}")

    xs = np.linspace(lo, hi, mesh_size)
    values = evaluator.mesh(xs)
    i = int(np.argmax(values))  # first occurrence, so ties go left
    best_x, best_v = float(xs[i]), float(values[i])

    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, mesh_size - 1)])
    dist = b - a

    if dist > tol:
        n_iter = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))
        c = a + INV_PHI_SQ * dist
        d = a + INV_PHI * dist
        vc = evaluator.point(c)
        vd = evaluator.point(d)
        for x, v in ((c, vc), (d, vd)):
            if v > best_v:
                best_x, best_v = x, v
        for _ in range(n_iter + 5):
            if dist <= tol:
                break
            if vc >= vd:
                b, d, vd = d, c, vc
                dist = b - a
                c = a + INV_PHI_SQ * dist
                vc = evaluator.point(c)
                if vc > best_v:
                    best_x, best_v = c, vc
            else:
                a, c, vc = c, d, vd
                dist = b - a
                d = a + INV_PHI * dist
                vd = evaluator.point(d)
                if vd > best_v:
                    best_x, best_v = d, vd
        mid = 0.5 * (a + b)
        vm = evaluator.point(mid)
        if vm > best_v:
            best_x, best_v = mid, vm

    return best_x, best_v, dist, float(xs[1] - xs[0])


def maximize(objective: Objective, lo: float, hi: float, tol: Optional[float] = None,
             mesh_size: Optional[int] = None, vectorized: bool = False) -> OptimizeReport:
    """Maximize ``objective`` over [lo, hi].

    With ``vectorized=True`` the objective receives numpy arrays (the mesh in a
    single call, refinement probes as length-one arrays).
    """
    tol = settings.optimizer_config.tolerance if tol is None else tol
    mesh_size = settings.optimizer_config.mesh_size if mesh_size is None else mesh_size
    evaluator = _Evaluator(objective, vectorized, 1.0)
    x, v, achieved, cell = _search(evaluator, lo, hi, tol, mesh_size)
    return OptimizeReport(argument=x, value=v, evaluations=evaluator.count,
                          achieved_tolerance=achieved, maximized=True, cell_width=cell)


def minimize(objective: Objective, lo: float, hi: float, tol: Optional[float] = None,
             mesh_size: Optional[int] = None, vectorized: bool = False) -> OptimizeReport:
    """minimize(g) is maximize(-g) with the sign restored on the reported value."""
    tol = settings.optimizer_config.tolerance if tol is None else tol
    mesh_size = settings.optimizer_config.mesh_size if mesh_size is None else mesh_size
    evaluator = _Evaluator(objective, vectorized, -1.0)
    x, v, achieved, cell = _search(evaluator, lo, hi, tol, mesh_size)
    return OptimizeReport(argument=x, value=-v, evaluations=evaluator.count,
                          achieved_tolerance=achieved, maximized=False, cell_width=cell)
