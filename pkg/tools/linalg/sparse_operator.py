#!/usr/bin/env python3
"""
Sparse Operator
Compressed-row operators and grid functions used by every scheme.

Grid functions are plain 1-D float64 numpy arrays. Operators wrap a canonical
scipy CSR matrix: sorted column indices, duplicates summed, explicit zeros kept
out of the structure.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from tools.errors import DimensionMismatchError, SplitkitError

logger = logging.getLogger(__name__)

GridFunction = npt.NDArray[np.float64]


def as_grid_function(values, length: Optional[int] = None) -> GridFunction:
    """
    Convert values to a contiguous float64 vector, checking length and finiteness

    Args:
        values: Anything numpy can turn into a 1-D array
        length: Expected length, or None to skip the check

    Returns:
        A new float64 array
    """
    x = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    if length is not None and x.shape[0] != length:
        raise DimensionMismatchError(f"Grid function has length {x.shape[0]}, expected {length}")
    if not np.all(np.isfinite(x)):
        raise SplitkitError("Grid function contains non-finite entries")
    return x


def _canonical(matrix) -> sp.csr_matrix:
    csr = sp.csr_matrix(matrix, dtype=np.float64, copy=True)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Immutable CSR operator with a symmetric-flag claim"""
    matrix: sp.csr_matrix
    symmetric: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "matrix", _canonical(self.matrix))

    # Construction

    @classmethod
    def from_dense(cls, dense, symmetric: bool = False, name: str = "") -> 'SparseOperator':
        return cls(sp.csr_matrix(np.asarray(dense, dtype=np.float64)), symmetric, name)

    @classmethod
    def from_triplets(cls, rows: Sequence[int], cols: Sequence[int], values: Sequence[float],
                      shape: tuple, symmetric: bool = False, name: str = "") -> 'SparseOperator':
        """Build from coordinate triplets; repeated (row, col) pairs are summed"""
        coo = sp.coo_matrix((np.asarray(values, dtype=np.float64),
                             (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
                            shape=shape)
        return cls(coo.tocsr(), symmetric, name)

    @classmethod
    def identity(cls, n: int) -> 'SparseOperator':
        return cls(sp.identity(n, dtype=np.float64, format="csr"), True, "I")

    @classmethod
    def zeros(cls, rows: int, cols: Optional[int] = None) -> 'SparseOperator':
        cols = rows if cols is None else cols
        return cls(sp.csr_matrix((rows, cols), dtype=np.float64), rows == cols, "0")

    @classmethod
    def diagonal(cls, values, name: str = "") -> 'SparseOperator':
        return cls(sp.diags(np.asarray(values, dtype=np.float64), format="csr"), True, name)

    # Shape and storage

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]

    @property
    def row_offsets(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def column_indices(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def frobenius_norm(self) -> float:
        return float(np.sqrt(np.dot(self.matrix.data, self.matrix.data)))

    # Algebra; every method returns a new operator

    def apply(self, x: GridFunction) -> GridFunction:
        return apply(self, x)

    def transpose(self) -> 'SparseOperator':
        return SparseOperator(self.matrix.T.tocsr(), self.symmetric, f"{self.name}^T")

    def scaled(self, c: float) -> 'SparseOperator':
        return SparseOperator(self.matrix * float(c), self.symmetric, self.name)

    def scale_rows(self, weights) -> 'SparseOperator':
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.rows,):
            raise DimensionMismatchError(f"Row weights of length {w.shape[0]} for {self.rows} rows")
        return SparseOperator(sp.diags(w) @ self.matrix, False, self.name)

    def scale_cols(self, weights) -> 'SparseOperator':
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (self.cols,):
            raise DimensionMismatchError(f"Column weights of length {w.shape[0]} for {self.cols} columns")
        return SparseOperator(self.matrix @ sp.diags(w), False, self.name)

    def shifted_identity(self, c: float) -> 'SparseOperator':
        """Return I + c·op"""
        if self.rows != self.cols:
            raise DimensionMismatchError("Shifted identity needs a square operator")
        shifted = sp.identity(self.rows, dtype=np.float64, format="csr") + self.matrix * float(c)
        return SparseOperator(shifted, self.symmetric, f"I+{c:g}{self.name}")

    def submatrix(self, rows, cols) -> 'SparseOperator':
        sub = self.matrix[np.asarray(rows, dtype=np.int64), :][:, np.asarray(cols, dtype=np.int64)]
        same = np.array_equal(np.asarray(rows), np.asarray(cols))
        return SparseOperator(sub, self.symmetric and same, self.name)

    def _check_same_shape(self, other: 'SparseOperator') -> None:
        if self.matrix.shape != other.matrix.shape:
            raise DimensionMismatchError(f"Shapes {self.matrix.shape} and {other.matrix.shape} differ")

    def __add__(self, other: 'SparseOperator') -> 'SparseOperator':
        self._check_same_shape(other)
        return SparseOperator(self.matrix + other.matrix, self.symmetric and other.symmetric)

    def __sub__(self, other: 'SparseOperator') -> 'SparseOperator':
        self._check_same_shape(other)
        return SparseOperator(self.matrix - other.matrix, self.symmetric and other.symmetric)

    def __matmul__(self, other: 'SparseOperator') -> 'SparseOperator':
        if self.cols != other.rows:
            raise DimensionMismatchError(f"Cannot compose {self.matrix.shape} with {other.matrix.shape}")
        return SparseOperator(self.matrix @ other.matrix, False)

    def check_symmetry(self, trials: int = 100, rng: Optional[np.random.Generator] = None) -> float:
        """
        Randomized symmetry check

        Returns:
            The worst |(Au,v) - (u,Av)| / (‖A‖_F ‖u‖ ‖v‖) over the trials
        """
        if self.rows != self.cols:
            return float("inf")
        rng = rng or np.random.default_rng(0)
        scale = max(self.frobenius_norm(), np.finfo(float).tiny)
        worst = 0.0
        for _ in range(trials):
            u = rng.standard_normal(self.cols)
            v = rng.standard_normal(self.cols)
            gap = abs(np.dot(apply(self, u), v) - np.dot(u, apply(self, v)))
            worst = max(worst, gap / (scale * np.linalg.norm(u) * np.linalg.norm(v)))
        return worst


def apply(op: SparseOperator, x: GridFunction) -> GridFunction:
    """Sparse mat-vec op·x"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != op.cols:
        raise DimensionMismatchError(f"Operator has {op.cols} columns, vector has length {x.shape[0]}")
    return np.asarray(op.matrix @ x, dtype=np.float64)


def block_operator(blocks: Sequence[Sequence[Optional[SparseOperator]]], symmetric: bool = False,
                   name: str = "") -> SparseOperator:
    """Assemble a block matrix; None entries are zero blocks"""
    grid = [[None if b is None else b.matrix for b in row] for row in blocks]
    return SparseOperator(sp.bmat(grid, format="csr"), symmetric, name)
