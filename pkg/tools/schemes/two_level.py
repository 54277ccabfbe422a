"""Weighted two-level scheme and the factorized two-component scheme."""

import logging
from typing import Callable, Optional

import numpy as np

from tools.linalg.krylov import cg_solve
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply
from tools.parabolic.coefficient import weighted_forcing
from tools.schemes.config import SchemeConfig

logger = logging.getLogger(__name__)


def forcing_at_sigma(f_n: Optional[GridFunction], f_np1: Optional[GridFunction],
                     sigma: float) -> Optional[GridFunction]:
    """f^{n+σ}, or None for a homogeneous step"""
    if f_n is None and f_np1 is None:
        return None
    f_n = np.zeros_like(f_np1) if f_n is None else f_n
    f_np1 = np.zeros_like(f_n) if f_np1 is None else f_np1
    return weighted_forcing(f_n, f_np1, sigma)


def weighted_substep(a_y: GridFunction, solve: Callable[[float, GridFunction, GridFunction], GridFunction],
                     y: GridFunction, forcing: Optional[GridFunction], sigma: float, tau: float) -> GridFunction:
    """
    One sub-step (z - y)/τ + A(σz + (1-σ)y) = f for any A

    Args:
        a_y: A·y, already evaluated
        solve: (c, rhs, x0) -> (I + c·A)⁻¹ rhs
        y: Current level
        forcing: f, or None
        sigma: Weight σ
        tau: Step
    """
    rhs = y - ((1.0 - sigma) * tau) * a_y
    if forcing is not None:
        rhs = rhs + tau * forcing
    if sigma == 0.0:
        return rhs
    return solve(sigma * tau, rhs, y)


def weighted_step(a: SparseOperator, y_n: GridFunction, f_n: Optional[GridFunction],
                  f_np1: Optional[GridFunction], cfg: SchemeConfig) -> GridFunction:
    """
    (I + στA) y^{n+1} = (I - (1-σ)τA) y^n + τ f^{n+σ}, warm-started from y^n

    σ = 0 is the explicit scheme and needs no solve.
    """
    def solve(c: float, rhs: GridFunction, x0: GridFunction) -> GridFunction:
        return cg_solve(a.shifted_identity(c), rhs, cfg.rel_tol, cfg.max_iter, x0)

    y_n = np.asarray(y_n, dtype=np.float64)
    forcing = forcing_at_sigma(f_n, f_np1, cfg.sigma)
    return weighted_substep(apply(a, y_n), solve, y_n, forcing, cfg.sigma, cfg.tau)


def factorized_step(a1: SparseOperator, a2: SparseOperator, y_n: GridFunction, f_n: Optional[GridFunction],
                    f_np1: Optional[GridFunction], cfg: SchemeConfig) -> GridFunction:
    """
    (I + στA1)(I + στA2)(y^{n+1} - y^n)/τ + (A1 + A2) y^n = f^{n+σ}

    σ = 1/2 is the Peaceman-Rachford analog, σ = 1 the Douglas-Rachford one.
    Two sequential solves, one per factor.
    """
    y_n = np.asarray(y_n, dtype=np.float64)
    residual = -(apply(a1, y_n) + apply(a2, y_n))
    forcing = forcing_at_sigma(f_n, f_np1, cfg.sigma)
    if forcing is not None:
        residual = residual + forcing
    c = cfg.sigma * cfg.tau
    if c == 0.0:
        return y_n + cfg.tau * residual
    half = cg_solve(a1.shifted_identity(c), residual, cfg.rel_tol, cfg.max_iter)
    increment = cg_solve(a2.shifted_identity(c), half, cfg.rel_tol, cfg.max_iter)
    return y_n + cfg.tau * increment


def factorized_norm(a2: SparseOperator, y: GridFunction, sigma: float, tau: float) -> float:
    """‖(I + στA2) y‖, the norm the factorized scheme does not increase"""
    z = np.asarray(y) + (sigma * tau) * apply(a2, y)
    return float(np.sqrt(np.dot(z, z)))
