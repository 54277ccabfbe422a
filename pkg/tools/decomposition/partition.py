#!/usr/bin/env python3
"""
Partitions of unity and diagonal restriction families.

Strips run along x1: every weight depends on the column index i1 only. HARD
strips are 0/1 indicators. LINEAR strips share `overlap_nodes` columns at each
interface, where the left weight steps down by 1/(m+1) per column and the
right weight takes the complement.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from tools.errors import PartitionError
from tools.linalg.sparse_operator import SparseOperator
from tools.parabolic.grid import Grid2D

logger = logging.getLogger(__name__)

UNITY_TOL = 1e-14


class PartitionProfile(str, Enum):
    HARD = "HARD"
    LINEAR = "LINEAR"


def _check_unity(weights: np.ndarray, what: str) -> None:
    if weights.ndim != 2 or weights.shape[0] < 1:
        raise PartitionError(f"{what} needs a (p, n) weight array with p >= 1")
    if np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
        raise PartitionError(f"{what} has negative or non-finite weights")
    gap = float(np.max(np.abs(weights.sum(axis=0) - 1.0))) if weights.shape[1] else 0.0
    if gap > UNITY_TOL:
        raise PartitionError(f"{what} weights sum to 1 only within {gap:.3e}")


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """p nonnegative nodal weight vectors χ_α with Σ_α χ_α = 1"""
    chi: np.ndarray
    profile: PartitionProfile = PartitionProfile.HARD
    overlap: int = 0

    def __post_init__(self):
        chi = np.array(self.chi, dtype=np.float64, copy=True)
        _check_unity(chi, "Partition of unity")
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)

    @property
    def p(self) -> int:
        return self.chi.shape[0]

    @property
    def size(self) -> int:
        return self.chi.shape[1]

    def support(self, alpha: int) -> np.ndarray:
        return np.flatnonzero(self.chi[alpha] > 0.0)


def _strip_columns(grid: Grid2D, p: int) -> list[np.ndarray]:
    columns = np.arange(1, grid.interior1 + 1)
    if p < 1 or p > columns.size:
        raise PartitionError(f"Cannot cut {columns.size} interior columns into {p} strips")
    return np.array_split(columns, p)


def build_strip_partition(grid: Grid2D, p: int, overlap_nodes: int = 0,
                          profile: PartitionProfile = PartitionProfile.HARD) -> PartitionOfUnity:
    """
    Strip partition of the interior nodes along x1

    Args:
        grid: Interior grid
        p: Number of strips
        overlap_nodes: Shared columns per interface (LINEAR only; HARD ignores it)
        profile: HARD indicators or LINEAR ramps

    Raises:
        PartitionError: When a strip is narrower than the overlap or p is too large
    """
    profile = PartitionProfile(profile)
    if overlap_nodes < 0:
        raise PartitionError(f"Overlap must be nonnegative, got {overlap_nodes}")
    strips = _strip_columns(grid, p)
    m = overlap_nodes if profile == PartitionProfile.LINEAR else 0
    if m and min(s.size for s in strips) < m:
        raise PartitionError(
            f"Strip widths {[int(s.size) for s in strips]} are thinner than overlap {m}")

    columns = np.zeros((p, grid.interior1))
    for alpha, strip in enumerate(strips):
        columns[alpha, strip - 1] = 1.0
    for alpha in range(p - 1):
        last = int(strips[alpha][-1])
        start = last + 1 - (m + 1) // 2
        for j in range(m):
            col = start + j - 1
            columns[alpha, col] = (m - j) / (m + 1)
            columns[alpha + 1, col] = (j + 1) / (m + 1)

    i1, _ = grid.node_indices()
    chi = columns[:, i1 - 1]
    logger.debug(f"Strip partition: p={p}, profile={profile.value}, overlap={m}")
    return PartitionOfUnity(chi, profile, m)


@dataclass(frozen=True, eq=False)
class RestrictionFamily:
    """
    Diagonal restrictions R_α with Σ R_α = I, stored as weight vectors.

    `supports` are the declared supports used by restricted solves; by default
    the nodes with positive weight. `nodal_weights` keeps the node partition a
    vector family on edges was derived from, so forcing can still be split.
    """
    weights: np.ndarray
    supports: Optional[tuple] = None
    nodal_weights: Optional[np.ndarray] = None
    space: str = "H"
    _operators: list = field(default_factory=list, init=False, repr=False)

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64, copy=True)
        _check_unity(weights, "Restriction family")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        if self.supports is None:
            object.__setattr__(self, "supports",
                               tuple(np.flatnonzero(w > 0.0) for w in weights))
        elif len(self.supports) != weights.shape[0]:
            raise PartitionError("One declared support per restriction is required")
        self._operators.extend(SparseOperator.diagonal(w, name=f"R{a + 1}") for a, w in enumerate(weights))

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    @property
    def size(self) -> int:
        return self.weights.shape[1]

    def operator(self, alpha: int) -> SparseOperator:
        return self._operators[alpha]

    def compose(self, components) -> np.ndarray:
        """Σ_α R_α y_α, accumulated in index order"""
        total = np.zeros(self.size)
        for w, y in zip(self.weights, components):
            total += w * y
        return total


def restrictions_from_partition(pou: PartitionOfUnity) -> RestrictionFamily:
    return RestrictionFamily(pou.chi, nodal_weights=pou.chi)
