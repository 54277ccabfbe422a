"""Exact semi-discrete solutions for constant coefficients."""

import numpy as np

from tools.errors import DimensionMismatchError
from tools.linalg.sparse_operator import GridFunction
from tools.parabolic.grid import Grid2D


def check_mode(grid: Grid2D, mode: tuple[int, int]) -> tuple[int, int]:
    m1, m2 = int(mode[0]), int(mode[1])
    if not (1 <= m1 <= grid.interior1 and 1 <= m2 <= grid.interior2):
        raise DimensionMismatchError(
            f"Mode ({m1}, {m2}) outside 1..{grid.interior1} x 1..{grid.interior2}")
    return m1, m2


def eigenvalue(grid: Grid2D, mode: tuple[int, int], coefficient_scale: float = 1.0) -> float:
    """λ = c Σ_α 4/h_α² sin²(m_α π h_α / (2 l_α))"""
    m1, m2 = check_mode(grid, mode)
    lam1 = 4.0 / grid.h1 ** 2 * np.sin(m1 * np.pi * grid.h1 / (2.0 * grid.l1)) ** 2
    lam2 = 4.0 / grid.h2 ** 2 * np.sin(m2 * np.pi * grid.h2 / (2.0 * grid.l2)) ** 2
    return float(coefficient_scale * (lam1 + lam2))


def directional_eigenvalues(grid: Grid2D, mode: tuple[int, int]) -> tuple[float, float]:
    """Eigenvalues of the x1 and x2 parts of the k≡1 operator on this mode"""
    m1, m2 = check_mode(grid, mode)
    lam1 = 4.0 / grid.h1 ** 2 * np.sin(m1 * np.pi * grid.h1 / (2.0 * grid.l1)) ** 2
    lam2 = 4.0 / grid.h2 ** 2 * np.sin(m2 * np.pi * grid.h2 / (2.0 * grid.l2)) ** 2
    return float(lam1), float(lam2)


def eigenvector(grid: Grid2D, mode: tuple[int, int]) -> GridFunction:
    """Product of sines sampled at the interior nodes"""
    m1, m2 = check_mode(grid, mode)
    x1, x2 = grid.node_coordinates()
    return np.sin(m1 * np.pi * x1 / grid.l1) * np.sin(m2 * np.pi * x2 / grid.l2)


def eigenmode_reference(grid: Grid2D, mode: tuple[int, int], t: float,
                        coefficient_scale: float = 1.0) -> GridFunction:
    """e^{-λt} v, the exact solution of du/dt + Au = 0 from u(0) = v for k ≡ c"""
    return np.exp(-eigenvalue(grid, mode, coefficient_scale) * t) * eigenvector(grid, mode)


def wave_eigenmode_reference(grid: Grid2D, mode: tuple[int, int], t: float,
                             coefficient_scale: float = 1.0) -> GridFunction:
    """cos(√λ t) v, solving u'' + Au = 0 with u(0) = v, u'(0) = 0"""
    return np.cos(np.sqrt(eigenvalue(grid, mode, coefficient_scale)) * t) * eigenvector(grid, mode)
