#!/usr/bin/env python3
"""
Model Operator Assembly
Five-point variable-coefficient stencil for -div(k grad u) with zero Dirichlet data.

Every edge coefficient is sampled once at its staggered midpoint, written as
(j + 0.5)·h so both end nodes see bitwise the same value and the assembled
matrix is exactly symmetric.
"""

import logging

import numpy as np

from tools.errors import CoefficientError
from tools.linalg.sparse_operator import SparseOperator
from tools.parabolic.coefficient import Coefficient
from tools.parabolic.grid import Grid2D

logger = logging.getLogger(__name__)


def sample_coefficient(k: Coefficient, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Evaluate k at the given points, rejecting values that are not admissible"""
    values = k(x1, x2)
    bad = ~(values > 0.0)
    if k.kappa is not None:
        bad |= values < k.kappa
    if np.any(bad):
        i = int(np.argmax(bad))
        point = (float(x1[i]), float(x2[i]))
        bound = 0.0 if k.kappa is None else k.kappa
        raise CoefficientError(
            f"Coefficient k{point} = {values[i]:.6g} violates k > 0 and k >= {bound:g}", point)
    return values


def _directional_triplets(grid: Grid2D, k: Coefficient, direction: int):
    i1, i2 = grid.node_indices()
    h1, h2 = grid.h1, grid.h2
    index = np.arange(grid.size)
    if direction == 1:
        inv = (grid.n1 / grid.l1) ** 2
        k_plus = sample_coefficient(k, (i1 + 0.5) * h1, i2 * h2)
        k_minus = sample_coefficient(k, (i1 - 0.5) * h1, i2 * h2)
        has_plus, has_minus = i1 < grid.interior1, i1 > 1
        stride = 1
    elif direction == 2:
        inv = (grid.n2 / grid.l2) ** 2
        k_plus = sample_coefficient(k, i1 * h1, (i2 + 0.5) * h2)
        k_minus = sample_coefficient(k, i1 * h1, (i2 - 0.5) * h2)
        has_plus, has_minus = i2 < grid.interior2, i2 > 1
        stride = grid.interior1
    else:
        raise ValueError(f"Direction must be 1 or 2, got {direction}")

    rows = [index, index[has_plus], index[has_minus]]
    cols = [index, index[has_plus] + stride, index[has_minus] - stride]
    vals = [(k_plus + k_minus) * inv, -k_plus[has_plus] * inv, -k_minus[has_minus] * inv]
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def assemble_directional(grid: Grid2D, k: Coefficient, direction: int) -> SparseOperator:
    """All terms of the stencil acting along x_direction"""
    rows, cols, vals = _directional_triplets(grid, k, direction)
    return SparseOperator.from_triplets(rows, cols, vals, (grid.size, grid.size), symmetric=True,
                                        name=f"A{direction}")


def assemble_A(grid: Grid2D, k: Coefficient) -> SparseOperator:
    """
    Assemble the grid elliptic operator

    Args:
        grid: Interior grid
        k: Coefficient, sampled at (x1 ± h1/2, x2) and (x1, x2 ± h2/2)

    Returns:
        Symmetric SparseOperator of size (N1-1)(N2-1)

    Raises:
        CoefficientError: naming the first midpoint where k is not admissible
    """
    parts = [_directional_triplets(grid, k, direction) for direction in (1, 2)]
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    a = SparseOperator.from_triplets(rows, cols, vals, (grid.size, grid.size), symmetric=True, name="A")
    logger.debug(f"Assembled A: {grid.size} unknowns, {a.matrix.nnz} nonzeros ({k.label})")
    return a


def spectral_lower_bound(grid: Grid2D, kappa: float) -> float:
    """κ(δ1 + δ2) with δ_α = 4/h_α² sin²(π h_α / (2 l_α))"""
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    delta1 = 4.0 / grid.h1 ** 2 * np.sin(np.pi * grid.h1 / (2.0 * grid.l1)) ** 2
    delta2 = 4.0 / grid.h2 ** 2 * np.sin(np.pi * grid.h2 / (2.0 * grid.l2)) ** 2
    return float(kappa * (delta1 + delta2))


def spectral_upper_bound(grid: Grid2D, k_max: float = 1.0) -> float:
    """Largest eigenvalue of the constant-coefficient operator, scaled by k_max"""
    upper1 = 4.0 / grid.h1 ** 2 * np.cos(np.pi * grid.h1 / (2.0 * grid.l1)) ** 2
    upper2 = 4.0 / grid.h2 ** 2 * np.cos(np.pi * grid.h2 / (2.0 * grid.l2)) ** 2
    return float(k_max * (upper1 + upper2))
