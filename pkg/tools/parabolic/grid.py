"""Uniform rectangular grid with homogeneous Dirichlet boundary."""

from dataclasses import dataclass

import numpy as np

from tools.errors import DimensionMismatchError


@dataclass(frozen=True)
class Grid2D:
    """
    Interior nodes (i1, i2), i_α = 1..N_α-1, ordered row-major: i2 outer, i1 inner.
    """
    l1: float
    l2: float
    n1: int
    n2: int

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0:
            raise ValueError(f"Domain sides must be positive, got ({self.l1}, {self.l2})")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError(f"Need at least 2 subdivisions per direction, got ({self.n1}, {self.n2})")

    @classmethod
    def unit_square(cls, n: int) -> 'Grid2D':
        return cls(1.0, 1.0, n, n)

    @property
    def h1(self) -> float:
        return self.l1 / self.n1

    @property
    def h2(self) -> float:
        return self.l2 / self.n2

    @property
    def interior1(self) -> int:
        return self.n1 - 1

    @property
    def interior2(self) -> int:
        return self.n2 - 1

    @property
    def size(self) -> int:
        return self.interior1 * self.interior2

    def index(self, i1: int, i2: int) -> int:
        if not (1 <= i1 <= self.interior1 and 1 <= i2 <= self.interior2):
            raise DimensionMismatchError(f"Node ({i1}, {i2}) is not interior")
        return (i2 - 1) * self.interior1 + (i1 - 1)

    def node(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.size:
            raise DimensionMismatchError(f"Index {index} outside 0..{self.size - 1}")
        return index % self.interior1 + 1, index // self.interior1 + 1

    def node_indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer (i1, i2) arrays in storage order"""
        idx = np.arange(self.size)
        return idx % self.interior1 + 1, idx // self.interior1 + 1

    def node_coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        i1, i2 = self.node_indices()
        return i1 * self.h1, i2 * self.h2
