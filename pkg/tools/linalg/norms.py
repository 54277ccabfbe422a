"""
Weighted inner products and norms ‖x‖_D = (Dx, x)^{1/2} for D in {I, A, A^-1}.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from tools.errors import DimensionMismatchError
from tools.linalg.krylov import cg_solve
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply

logger = logging.getLogger(__name__)

INVERSE_REL_TOL = 1e-12


class NormTag(str, Enum):
    IDENTITY = "IDENTITY"
    A = "A"
    A_INVERSE = "A_INVERSE"


@dataclass(frozen=True, eq=False)
class NormKind:
    """Weight D of a norm plus the operator it refers to"""
    tag: NormTag
    operator: Optional[SparseOperator] = None

    def __post_init__(self):
        if self.tag != NormTag.IDENTITY and self.operator is None:
            raise ValueError(f"Norm {self.tag.value} needs the operator A")

    @classmethod
    def identity(cls) -> 'NormKind':
        return cls(NormTag.IDENTITY)

    @classmethod
    def energy(cls, a: SparseOperator) -> 'NormKind':
        return cls(NormTag.A, a)

    @classmethod
    def inverse(cls, a: SparseOperator) -> 'NormKind':
        return cls(NormTag.A_INVERSE, a)

    def weight(self, x: GridFunction, rel_tol: float = INVERSE_REL_TOL) -> GridFunction:
        """Return D·x"""
        if self.tag == NormTag.IDENTITY:
            return np.asarray(x, dtype=np.float64)
        if self.tag == NormTag.A:
            return apply(self.operator, x)
        return cg_solve(self.operator, x, rel_tol=rel_tol)


def weighted_inner(x: GridFunction, y: GridFunction, d: NormKind) -> float:
    """(Dx, y)"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatchError(f"Vectors of length {x.shape[0]} and {y.shape[0]}")
    return float(np.dot(d.weight(x), y))


def weighted_norm(x: GridFunction, d: NormKind) -> float:
    """
    ‖x‖_D

    For A_INVERSE the system Az = x is solved by CG at rel_tol 1e-12; a failed
    solve raises ConvergenceError with the residual.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.any(x):
        return 0.0
    # clamp roundoff below zero for semidefinite weights
    return float(np.sqrt(max(weighted_inner(x, x, d), 0.0)))


def euclidean_norm(x: GridFunction) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.dot(x, x)))
