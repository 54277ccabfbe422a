"""Conjugate gradients and power iteration on SparseOperator."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tools.errors import ConvergenceError, DimensionMismatchError, IndefiniteOperatorError
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-12
DEFAULT_MAX_ITER = 10000


@dataclass(frozen=True)
class CGResult:
    """Result of a conjugate-gradient solve"""
    x: GridFunction
    converged: bool
    iterations: int
    residual: float    # final ‖b - Ax‖ / ‖b‖, recomputed from scratch


def conjugate_gradient(op: SparseOperator, rhs: GridFunction, rel_tol: float = DEFAULT_REL_TOL,
                       max_iter: int = DEFAULT_MAX_ITER, x0: Optional[GridFunction] = None) -> CGResult:
    """
    Solve op·x = rhs for symmetric positive definite op

    The recursive residual drives the iteration. When it meets the tolerance the
    true residual is recomputed; if that still misses, the iteration restarts
    from the current iterate so the reported residual is always honest.

    Args:
        op: Symmetric positive definite operator
        rhs: Right-hand side
        rel_tol: Relative residual target in (0, 1)
        max_iter: Total iteration cap across restarts
        x0: Initial guess (warm start), zeros when omitted

    Returns:
        CGResult; raises IndefiniteOperatorError on non-positive curvature
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    b = np.asarray(rhs, dtype=np.float64)
    if op.rows != op.cols or b.shape != (op.rows,):
        raise DimensionMismatchError(f"Operator {op.rows}x{op.cols} cannot solve for rhs of length {b.shape[0]}")

    b_norm = float(np.sqrt(np.dot(b, b)))
    if b_norm == 0.0:
        return CGResult(np.zeros_like(b), True, 0, 0.0)
    target = rel_tol * b_norm

    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64, copy=True)
    if x.shape != b.shape:
        raise DimensionMismatchError("Initial guess does not match the right-hand side")

    iterations = 0
    while True:
        r = b - apply(op, x)
        rr = float(np.dot(r, r))
        true_residual = np.sqrt(rr)
        if true_residual <= target:
            return CGResult(x, True, iterations, true_residual / b_norm)
        if iterations >= max_iter or not np.isfinite(rr):
            return CGResult(x, False, iterations, true_residual / b_norm)

        p = r.copy()
        while iterations < max_iter:
            ap = apply(op, p)
            curvature = float(np.dot(p, ap))
            if curvature <= 0.0:
                raise IndefiniteOperatorError(
                    f"Non-positive curvature {curvature:.3e} at iteration {iterations}; operator is not SPD")
            alpha = rr / curvature
            x += alpha * p
            r -= alpha * ap
            rr_next = float(np.dot(r, r))
            iterations += 1
            if np.sqrt(rr_next) <= target:
                break
            p = r + (rr_next / rr) * p
            rr = rr_next
        logger.debug(f"CG reached recursive residual after {iterations} iterations")


def cg_solve(op: SparseOperator, rhs: GridFunction, rel_tol: float = DEFAULT_REL_TOL,
             max_iter: int = DEFAULT_MAX_ITER, x0: Optional[GridFunction] = None) -> GridFunction:
    """Solve op·x = rhs, raising ConvergenceError when the cap is hit"""
    result = conjugate_gradient(op, rhs, rel_tol, max_iter, x0)
    if not result.converged:
        raise ConvergenceError("Conjugate gradients did not converge", result.residual, result.iterations)
    return result.x


def _power_iteration(matvec, start: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray]:
    v = start / np.linalg.norm(start)
    estimate = float(np.dot(v, matvec(v)))
    for iteration in range(1, max_iter + 1):
        w = matvec(v)
        w_norm = float(np.linalg.norm(w))
        if w_norm == 0.0:
            return 0.0, v
        v = w / w_norm
        previous, estimate = estimate, float(np.dot(v, matvec(v)))
        if abs(estimate - previous) <= tol * abs(estimate):
            logger.debug(f"Power iteration converged in {iteration} iterations")
            return estimate, v
    raise ConvergenceError("Power iteration did not converge", abs(estimate - previous), max_iter)


def operator_norm_estimate(op: SparseOperator, tol: float = 1e-10, max_iter: int = 20000,
                           seed: int = 0) -> float:
    """
    Largest-magnitude eigenvalue of a symmetric operator by power iteration

    The iterate starts from a seeded random vector so no eigenvector is excluded
    by symmetry of the start.
    """
    if op.rows != op.cols:
        raise DimensionMismatchError("Operator norm estimate needs a square operator")
    start = np.random.default_rng(seed).standard_normal(op.rows)
    estimate, _ = _power_iteration(lambda v: apply(op, v), start, tol, max_iter)
    return abs(estimate)


def smallest_eigenvalue_estimate(op: SparseOperator, tol: float = 1e-13, max_iter: int = 20000,
                                 shift: Optional[float] = None) -> float:
    """
    Smallest eigenvalue of a symmetric positive semidefinite operator

    Runs power iteration on shift·I - op and reports the Rayleigh quotient of op
    at the final iterate, which never falls below the true minimum.
    """
    if shift is None:
        shift = operator_norm_estimate(op) * (1.0 + 1e-3)
    start = np.ones(op.rows)
    _, v = _power_iteration(lambda u: shift * u - apply(op, u), start, tol, max_iter)
    return float(np.dot(v, apply(op, v)) / np.dot(v, v))


def rayleigh_quotients(op: SparseOperator, samples: int = 50,
                       rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Rayleigh quotients (op u, u)/(u, u) at random vectors"""
    rng = rng or np.random.default_rng(0)
    quotients = np.empty(samples)
    for i in range(samples):
        u = rng.standard_normal(op.cols)
        quotients[i] = np.dot(apply(op, u), u) / np.dot(u, u)
    return quotients
