"""Diffusion coefficients k(x) and time-dependent forcing on the grid."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from tools.linalg.sparse_operator import GridFunction
from tools.parabolic.expression import compile_expression
from tools.parabolic.grid import Grid2D


@dataclass(frozen=True, eq=False)
class Coefficient:
    """
    Coefficient k(x1, x2) with a claimed positive lower bound kappa.

    The evaluator must accept numpy arrays. A kappa of None means "whatever the
    assembler samples"; the assembler then only insists on positivity.
    """
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kappa: Optional[float] = None
    label: str = ""
    constant_value: Optional[float] = None

    def __call__(self, x1, x2) -> np.ndarray:
        x1 = np.asarray(x1, dtype=np.float64)
        x2 = np.asarray(x2, dtype=np.float64)
        values = np.asarray(self.evaluator(x1, x2), dtype=np.float64)
        return np.broadcast_to(values, np.broadcast(x1, x2).shape).copy()

    @property
    def is_constant(self) -> bool:
        return self.constant_value is not None

    @classmethod
    def constant(cls, c: float) -> 'Coefficient':
        c = float(c)
        return cls(lambda x1, x2: np.full(np.broadcast(x1, x2).shape, c), kappa=c,
                   label=f"CONSTANT({c:g})", constant_value=c)

    @classmethod
    def checkerboard(cls, high: float, low: float, l1: float, l2: float, cells: int = 2) -> 'Coefficient':
        """high on cells whose index sum is even, low elsewhere"""
        def evaluate(x1, x2):
            c1 = np.floor(cells * np.asarray(x1) / l1).astype(np.int64)
            c2 = np.floor(cells * np.asarray(x2) / l2).astype(np.int64)
            return np.where((c1 + c2) % 2 == 0, high, low)
        return cls(evaluate, kappa=min(high, low), label=f"CHECKERBOARD({high:g},{low:g})")

    @classmethod
    def expression(cls, text: str, kappa: Optional[float] = None) -> 'Coefficient':
        return cls(compile_expression(text, ("x1", "x2")), kappa=kappa, label=text)


class GridForcing:
    """Time-indexed generator t -> f(t) on the interior nodes"""

    def __init__(self, grid: Grid2D, source: Optional[Callable[[np.ndarray, np.ndarray, float], np.ndarray]] = None,
                 label: str = "ZERO"):
        self.grid = grid
        self.source = source
        self.label = label
        self._x1, self._x2 = grid.node_coordinates()

    @classmethod
    def zero(cls, grid: Grid2D) -> 'GridForcing':
        return cls(grid)

    @classmethod
    def expression(cls, grid: Grid2D, text: str) -> 'GridForcing':
        evaluate = compile_expression(text, ("x1", "x2", "t"))
        return cls(grid, lambda x1, x2, t: evaluate(x1, x2, np.full_like(x1, t)), label=text)

    @property
    def is_zero(self) -> bool:
        return self.source is None

    def __call__(self, t: float) -> GridFunction:
        if self.source is None:
            return np.zeros(self.grid.size)
        return np.asarray(self.source(self._x1, self._x2, float(t)), dtype=np.float64).reshape(-1)


def weighted_forcing(f_n: GridFunction, f_np1: GridFunction, sigma: float) -> GridFunction:
    """f^{n+σ} = σ f^{n+1} + (1-σ) f^n"""
    return sigma * np.asarray(f_np1) + (1.0 - sigma) * np.asarray(f_n)
