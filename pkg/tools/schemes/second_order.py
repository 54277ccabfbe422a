"""
Regularized three-level scheme for u'' + Au = f:

    (y^{n+1} - 2y^n + y^{n-1})/τ² + Σ_α (I + στ²A_α)⁻¹ A_α y^n = f^n

The implicit factor carries τ², not τ.
"""

import logging
from typing import Optional

import numpy as np

from tools.errors import DecompositionError
from tools.decomposition.operator_family import OperatorFamily
from tools.linalg.norms import NormKind, weighted_inner
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply
from tools.schemes.config import SchemeConfig
from tools.schemes.shifted_solve import map_components, solve_shifted, sum_in_order

logger = logging.getLogger(__name__)


def second_order_start(a: SparseOperator, u0: GridFunction, v0: Optional[GridFunction],
                       f0: Optional[GridFunction], tau: float) -> GridFunction:
    """Taylor start y^1 = u^0 + τv^0 - (τ²/2)(Au^0 - f(0))"""
    u0 = np.asarray(u0, dtype=np.float64)
    acceleration = -apply(a, u0)
    if f0 is not None:
        acceleration = acceleration + np.asarray(f0)
    y1 = u0 + (0.5 * tau * tau) * acceleration
    if v0 is not None:
        y1 = y1 + tau * np.asarray(v0)
    return y1


def damped_operator(family: OperatorFamily, y: GridFunction, cfg: SchemeConfig) -> GridFunction:
    """M y = Σ_α (I + στ²A_α)⁻¹ A_α y"""
    c = cfg.sigma * cfg.tau ** 2

    def term(alpha: int) -> GridFunction:
        return solve_shifted(family, alpha, c, apply(family.summands[alpha], y), cfg.rel_tol, cfg.max_iter)

    return sum_in_order(map_components(term, family.p, cfg.workers))


def second_order_regularized_step(family: OperatorFamily, y_nm1: GridFunction, y_n: GridFunction,
                                  f_n: Optional[GridFunction], cfg: SchemeConfig) -> GridFunction:
    y_n = np.asarray(y_n, dtype=np.float64)
    acceleration = -damped_operator(family, y_n, cfg)
    if f_n is not None:
        acceleration = acceleration + np.asarray(f_n)
    return 2.0 * y_n - np.asarray(y_nm1) + (cfg.tau ** 2) * acceleration


def energy_weight(family: OperatorFamily) -> NormKind:
    """
    Inner product in which M is self-adjoint: I for symmetric summands, A for
    R_α A, A⁻¹ for A R_α
    """
    if family.selfadjoint:
        return NormKind.identity()
    if family.row_weights is not None:
        return NormKind.energy(family.base)
    if family.col_weights is not None:
        return NormKind.inverse(family.base)
    raise DecompositionError(f"No conserved energy for a {family.kind.value} family")


def second_order_energy(family: OperatorFamily, y_prev: GridFunction, y_curr: GridFunction,
                        cfg: SchemeConfig) -> float:
    """
    E = ‖(y^{n+1} - y^n)/τ‖²_S + (M y^{n+1}, y^n)_S

    Conserved by the homogeneous scheme and nonnegative once σ >= p/4.
    """
    weight = energy_weight(family)
    velocity = (np.asarray(y_curr) - np.asarray(y_prev)) / cfg.tau
    return weighted_inner(velocity, velocity, weight) + weighted_inner(
        damped_operator(family, np.asarray(y_curr, dtype=np.float64), cfg), y_prev, weight)
