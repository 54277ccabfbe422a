"""
Splitting of a 2x2 operator matrix A = [[A11, A12], [A21, A22]] by rows or by columns.

ROW:    A^(1) = [[A11, A12], [0, 0]],   A^(2) = [[0, 0], [A21, A22]]
COLUMN: A^(1) = [[A11, 0], [A21, 0]],   A^(2) = [[0, A12], [0, A22]]

Both run the weighted component-wise sweep over A^(1) then A^(2). Only the
diagonal blocks are ever inverted. At σ = 1 the COLUMN sweep is the purely
implicit one, computing y1^{n+1/2}, y2^{n+1/2}, y2^{n+1}, y1^{n+1} in that order.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from tools.errors import DimensionMismatchError
from tools.linalg.krylov import cg_solve
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply, block_operator
from tools.schemes.config import SchemeConfig

logger = logging.getLogger(__name__)


class SplitVariant(str, Enum):
    ROW = "ROW"
    COLUMN = "COLUMN"


@dataclass(frozen=True, eq=False)
class SystemState:
    u1: GridFunction
    u2: GridFunction
    a11: SparseOperator
    a12: SparseOperator
    a21: SparseOperator
    a22: SparseOperator

    def __post_init__(self):
        n1, n2 = self.a11.rows, self.a22.rows
        shapes = {"A11": (self.a11.matrix.shape, (n1, n1)), "A12": (self.a12.matrix.shape, (n1, n2)),
                  "A21": (self.a21.matrix.shape, (n2, n1)), "A22": (self.a22.matrix.shape, (n2, n2))}
        for name, (actual, expected) in shapes.items():
            if actual != expected:
                raise DimensionMismatchError(f"{name} has shape {actual}, expected {expected}")
        if np.shape(self.u1) != (n1,) or np.shape(self.u2) != (n2,):
            raise DimensionMismatchError("Solution blocks do not match the diagonal blocks")

    def stacked(self) -> GridFunction:
        return np.concatenate([self.u1, self.u2])

    def operator(self) -> SparseOperator:
        symmetric = self.a11.symmetric and self.a22.symmetric and \
            (self.a12.matrix - self.a21.matrix.T).count_nonzero() == 0
        return block_operator([[self.a11, self.a12], [self.a21, self.a22]], symmetric, "A")


def _solve(block: SparseOperator, c: float, rhs: GridFunction, cfg: SchemeConfig, x0=None) -> GridFunction:
    if c == 0.0:
        return rhs
    return cg_solve(block.shifted_identity(c), rhs, cfg.rel_tol, cfg.max_iter, x0)


def _diagonal_update(block: SparseOperator, off: SparseOperator, own: GridFunction, other_old: GridFunction,
                     other_new: GridFunction, cfg: SchemeConfig) -> GridFunction:
    """Row whose diagonal block is implicit; the coupling term sees the weighted other block"""
    s, tau = cfg.sigma, cfg.tau
    coupled = s * other_new + (1.0 - s) * other_old
    rhs = own - ((1.0 - s) * tau) * apply(block, own) - tau * apply(off, coupled)
    return _solve(block, s * tau, rhs, cfg, own)


def _coupling_update(off: SparseOperator, own: GridFunction, other_old: GridFunction,
                     other_new: GridFunction, cfg: SchemeConfig) -> GridFunction:
    """Row carrying only an off-diagonal block: an explicit update"""
    s = cfg.sigma
    return own - cfg.tau * apply(off, s * other_new + (1.0 - s) * other_old)


def system_split_step(sys: SystemState, variant: SplitVariant, cfg: SchemeConfig) -> SystemState:
    """
    One homogeneous step of the row or column splitting

    Returns:
        A new SystemState with the same blocks
    """
    variant = SplitVariant(variant)
    u1, u2 = np.asarray(sys.u1, dtype=np.float64), np.asarray(sys.u2, dtype=np.float64)
    if variant == SplitVariant.ROW:
        # A^(1): u2 frozen, u1 implicit in A11 with A12 u2
        half1 = _diagonal_update(sys.a11, sys.a12, u1, u2, u2, cfg)
        # A^(2): u1 frozen, u2 implicit in A22 with A21 u1
        new2 = _diagonal_update(sys.a22, sys.a21, u2, half1, half1, cfg)
        new1 = half1
    else:
        half1 = _solve(sys.a11, cfg.sigma * cfg.tau,
                       u1 - ((1.0 - cfg.sigma) * cfg.tau) * apply(sys.a11, u1), cfg, u1)
        half2 = _coupling_update(sys.a21, u2, u1, half1, cfg)
        new2 = _solve(sys.a22, cfg.sigma * cfg.tau,
                      half2 - ((1.0 - cfg.sigma) * cfg.tau) * apply(sys.a22, half2), cfg, half2)
        new1 = _coupling_update(sys.a12, half1, half2, new2, cfg)
    return replace(sys, u1=new1, u2=new2)
