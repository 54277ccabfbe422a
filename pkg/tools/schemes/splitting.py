#!/usr/bin/env python3
"""
Additive Splitting Schemes
Component-wise, additive-averaged, regularized and vector-additive steps over
an OperatorFamily.

Forcing arrives already split into parts f_α with Σ f_α = f (see
OperatorFamily.split_forcing); None means a homogeneous step.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from tools.errors import DimensionMismatchError
from tools.decomposition.operator_family import OperatorFamily
from tools.linalg.sparse_operator import GridFunction, apply
from tools.schemes.config import Ordering, SchemeConfig
from tools.schemes.shifted_solve import map_components, solve_shifted, sum_in_order
from tools.schemes.two_level import weighted_substep

logger = logging.getLogger(__name__)


def _parts(family: OperatorFamily, f_parts: Optional[Sequence[Optional[GridFunction]]]) -> list:
    if f_parts is None:
        return [None] * family.p
    if len(f_parts) != family.p:
        raise DimensionMismatchError(f"{len(f_parts)} forcing parts for {family.p} summands")
    return list(f_parts)


def _summand_substep(family: OperatorFamily, alpha: int, y: GridFunction, forcing: Optional[GridFunction],
                     sigma: float, tau: float, cfg: SchemeConfig) -> GridFunction:
    def solve(c, rhs, x0):
        return solve_shifted(family, alpha, c, rhs, cfg.rel_tol, cfg.max_iter, x0)
    return weighted_substep(apply(family.summands[alpha], y), solve, y, forcing, sigma, tau)


def componentwise_sweep(family: OperatorFamily, y_n: GridFunction,
                        f_parts: Optional[Sequence[Optional[GridFunction]]], cfg: SchemeConfig,
                        ordering: Optional[Ordering] = None) -> GridFunction:
    """
    Sequential weighted sub-steps over A_1, ..., A_p

    STRANG runs A_1 .. A_p and then A_p .. A_1, each on τ/2, so every summand
    sees a total step of τ. With σ = 1/2 this is the symmetrized sweep.
    """
    ordering = Ordering(ordering or cfg.ordering)
    parts = _parts(family, f_parts)
    y = np.asarray(y_n, dtype=np.float64)
    if ordering == Ordering.FORWARD:
        sweep, tau = list(range(family.p)), cfg.tau
    else:
        sweep, tau = list(range(family.p)) + list(reversed(range(family.p))), 0.5 * cfg.tau
    for alpha in sweep:
        y = _summand_substep(family, alpha, y, parts[alpha], cfg.sigma, tau, cfg)
    return y


def additive_averaged_step(family: OperatorFamily, y_n: GridFunction,
                           f_parts: Optional[Sequence[Optional[GridFunction]]], cfg: SchemeConfig) -> GridFunction:
    """
    (y_α - y^n)/(pτ) + A_α(σ y_α + (1-σ) y^n) = f_α, then y^{n+1} = (1/p) Σ y_α

    The p sub-steps are independent and may run on cfg.workers threads; the
    average is always taken in index order.
    """
    parts = _parts(family, f_parts)
    y = np.asarray(y_n, dtype=np.float64)
    p = family.p

    def component(alpha: int) -> GridFunction:
        return _summand_substep(family, alpha, y, parts[alpha], cfg.sigma, p * cfg.tau, cfg)

    return sum_in_order(map_components(component, p, cfg.workers)) / p


def regularized_step(family: OperatorFamily, y_n: GridFunction, f: Optional[GridFunction],
                     cfg: SchemeConfig) -> GridFunction:
    """y^{n+1} = y^n - τ Σ_α (I + στA_α)⁻¹ A_α y^n + τ f^{n+σ}"""
    y = np.asarray(y_n, dtype=np.float64)
    c = cfg.sigma * cfg.tau

    def damped(alpha: int) -> GridFunction:
        return solve_shifted(family, alpha, c, apply(family.summands[alpha], y), cfg.rel_tol, cfg.max_iter)

    result = y - cfg.tau * sum_in_order(map_components(damped, family.p, cfg.workers))
    if f is not None:
        result = result + cfg.tau * np.asarray(f)
    return result


def regularized_averaged_step(family: OperatorFamily, y_n: GridFunction,
                              f_parts: Optional[Sequence[Optional[GridFunction]]],
                              cfg: SchemeConfig) -> GridFunction:
    """
    Additive-averaged realization of the regularized scheme

    Components y_α = y^n - pτ (I + στA_α)⁻¹ A_α y^n + pτ f_α are averaged.
    """
    parts = _parts(family, f_parts)
    y = np.asarray(y_n, dtype=np.float64)
    p, c = family.p, cfg.sigma * cfg.tau

    def component(alpha: int) -> GridFunction:
        z = y - (p * cfg.tau) * solve_shifted(family, alpha, c, apply(family.summands[alpha], y),
                                              cfg.rel_tol, cfg.max_iter)
        if parts[alpha] is not None:
            z = z + (p * cfg.tau) * parts[alpha]
        return z

    return sum_in_order(map_components(component, p, cfg.workers)) / p


@dataclass(frozen=True)
class VectorState:
    """Component levels y_α^n, plus y_α^{n-1} for three-level schemes"""
    components: tuple
    previous: Optional[tuple] = None

    @property
    def p(self) -> int:
        return len(self.components)

    @classmethod
    def replicated(cls, u0: GridFunction, p: int) -> 'VectorState':
        u0 = np.asarray(u0, dtype=np.float64)
        return cls(tuple(u0.copy() for _ in range(p)))


def vector_additive_step(family: OperatorFamily, state: VectorState, f: Optional[GridFunction],
                         cfg: SchemeConfig) -> VectorState:
    """
    (I + στA_α)(y_α^{n+1} - y_α^n)/τ + Σ_β A_β y_β^n = f^n for every α

    Each replica is implicit only in its own summand; all of them see the same
    explicit sum.
    """
    if state.p != family.p:
        raise DimensionMismatchError(f"State has {state.p} components, family has {family.p}")
    shared = sum_in_order([apply(a, y) for a, y in zip(family.summands, state.components)])
    rhs = -cfg.tau * shared
    if f is not None:
        rhs = rhs + cfg.tau * np.asarray(f)
    c = cfg.sigma * cfg.tau

    def component(alpha: int) -> GridFunction:
        y = state.components[alpha]
        return y + solve_shifted(family, alpha, c, rhs, cfg.rel_tol, cfg.max_iter)

    return VectorState(tuple(map_components(component, family.p, cfg.workers)))


def vector_additive_energy(family: OperatorFamily, state: VectorState) -> float:
    """‖Σ_β A_β y_β‖, non-increasing for symmetric nonnegative summands at σ >= p/2"""
    total = sum_in_order([apply(a, y) for a, y in zip(family.summands, state.components)])
    return float(np.sqrt(np.dot(total, total)))
