"""
Shifted solves (I + c·A_α) z = r for every summand shape the schemes meet.

Symmetric summands go straight to CG. Row-scaled summands W A are solved on
the support S of W, where the system diag(1/w_S) + c A_SS is symmetric positive
definite; rows off the support keep their right-hand side. Column-scaled
summands A W reduce to the row-scaled case through v = W z.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, TypeVar

import numpy as np

from tools.errors import DecompositionError, SingularRestrictedSystemError
from tools.decomposition.operator_family import FamilyKind, OperatorFamily
from tools.linalg.krylov import DEFAULT_MAX_ITER, DEFAULT_REL_TOL, cg_solve
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply

logger = logging.getLogger(__name__)

T = TypeVar('T')


def map_components(fn: Callable[[int], T], count: int, workers: int = 1) -> list[T]:
    """fn(0), ..., fn(count-1), threaded when workers > 1; results in index order"""
    if workers <= 1 or count <= 1:
        return [fn(alpha) for alpha in range(count)]
    with ThreadPoolExecutor(max_workers=min(workers, count)) as executor:
        return list(executor.map(fn, range(count)))


def solve_row_scaled(a: SparseOperator, w: np.ndarray, c: float, rhs: GridFunction,
                     rel_tol: float = DEFAULT_REL_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     x0: Optional[GridFunction] = None) -> GridFunction:
    """(I + c·diag(w)·A) z = rhs for symmetric positive definite A and w >= 0"""
    rhs = np.asarray(rhs, dtype=np.float64)
    z = rhs.copy()
    support = np.flatnonzero(w > 0.0)
    if support.size == 0 or c == 0.0:
        return z
    outside = np.setdiff1d(np.arange(a.rows), support, assume_unique=True)
    local = a.submatrix(support, support)
    system = SparseOperator(local.matrix * c + SparseOperator.diagonal(1.0 / w[support]).matrix, True)
    b = rhs[support] / w[support]
    if outside.size:
        b = b - c * apply(a.submatrix(support, outside), rhs[outside])
    guess = None if x0 is None else np.asarray(x0)[support]
    z[support] = cg_solve(system, b, rel_tol, max_iter, guess)
    return z


def solve_col_scaled(a: SparseOperator, w: np.ndarray, c: float, rhs: GridFunction,
                     rel_tol: float = DEFAULT_REL_TOL, max_iter: int = DEFAULT_MAX_ITER) -> GridFunction:
    """(I + c·A·diag(w)) z = rhs, via v = diag(w) z and z = rhs - c·A v"""
    rhs = np.asarray(rhs, dtype=np.float64)
    if c == 0.0:
        return rhs.copy()
    v = solve_row_scaled(a, w, c, w * rhs, rel_tol, max_iter)
    return rhs - c * apply(a, v)


def solve_shifted(family: OperatorFamily, alpha: int, c: float, rhs: GridFunction,
                  rel_tol: float = DEFAULT_REL_TOL, max_iter: int = DEFAULT_MAX_ITER,
                  x0: Optional[GridFunction] = None) -> GridFunction:
    """
    Solve (I + c·A_α) z = rhs

    Args:
        family: Operator family holding A_α
        alpha: Summand index
        c: Shift, c >= 0 (στ or στ² in the schemes)
        rhs: Right-hand side
        rel_tol: CG tolerance
        max_iter: CG iteration cap
        x0: Warm start for the CG paths

    Raises:
        DecompositionError: For skew families and nonsymmetric summands with no scaling structure
    """
    if c < 0.0:
        raise DecompositionError(f"Shift must be nonnegative, got {c}")
    if c == 0.0:
        return np.array(rhs, dtype=np.float64, copy=True)
    if family.kind == FamilyKind.SKEW_SPLIT:
        raise DecompositionError("Skew-symmetric families are construction-only and cannot be solved with")
    summand = family.summands[alpha]
    if summand.symmetric:
        return cg_solve(summand.shifted_identity(c), rhs, rel_tol, max_iter, x0)
    if family.row_weights is not None:
        return solve_row_scaled(family.base, family.row_weights[alpha], c, rhs, rel_tol, max_iter, x0)
    if family.col_weights is not None:
        return solve_col_scaled(family.base, family.col_weights[alpha], c, rhs, rel_tol, max_iter)
    raise DecompositionError(f"No shifted solver for nonsymmetric summand {summand.name} of {family.kind.value}")


def solve_restricted(a: SparseOperator, w: np.ndarray, support: np.ndarray, c: float, rhs: GridFunction,
                     rel_tol: float = DEFAULT_REL_TOL, max_iter: int = DEFAULT_MAX_ITER) -> GridFunction:
    """
    Solve (W + c·W A W) x = W rhs on the declared support, x = 0 elsewhere

    Raises:
        SingularRestrictedSystemError: When w vanishes somewhere inside the support
    """
    support = np.asarray(support, dtype=np.int64)
    x = np.zeros(a.rows)
    if support.size == 0:
        return x
    w_s = w[support]
    if np.any(w_s <= 0.0):
        node = int(support[np.argmax(w_s <= 0.0)])
        raise SingularRestrictedSystemError(f"Restriction weight vanishes at node {node} inside its support")
    local = a.submatrix(support, support).scale_rows(w_s).scale_cols(w_s)
    system = SparseOperator(0.5 * c * (local.matrix + local.matrix.T) + SparseOperator.diagonal(w_s).matrix, True)
    x[support] = cg_solve(system, w_s * np.asarray(rhs)[support], rel_tol, max_iter)
    return x


def sum_in_order(vectors: Sequence[GridFunction]) -> GridFunction:
    """Left-to-right sum, so the result does not depend on evaluation order"""
    total = np.array(vectors[0], dtype=np.float64, copy=True)
    for v in vectors[1:]:
        total += v
    return total
