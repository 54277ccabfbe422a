"""
Subdomain schemes over a diagonal restriction family R_α on H.

Both schemes solve, for each α on the declared support of R_α,
    R_α Δ_α / τ + σ R_α A R_α Δ_α + R_α A u^n = 0
and compose u^{n+1} = Σ_α R_α y_α^{n+1}. The first keeps its own component
levels y_α; the second restarts every component from the composed u^n.
"""

import logging

import numpy as np

from tools.errors import DimensionMismatchError
from tools.decomposition.partition import RestrictionFamily
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply
from tools.schemes.config import SchemeConfig
from tools.schemes.shifted_solve import map_components, solve_restricted, sum_in_order
from tools.schemes.splitting import VectorState

logger = logging.getLogger(__name__)


def _increments(a: SparseOperator, restrictions: RestrictionFamily, composed: GridFunction,
                cfg: SchemeConfig) -> list[GridFunction]:
    rhs = -cfg.tau * apply(a, composed)

    def increment(alpha: int) -> GridFunction:
        return solve_restricted(a, restrictions.weights[alpha], restrictions.supports[alpha],
                                cfg.sigma * cfg.tau, rhs, cfg.rel_tol, cfg.max_iter)

    return map_components(increment, restrictions.p, cfg.workers)


def subdomain_step_418(a: SparseOperator, restrictions: RestrictionFamily, state: VectorState,
                       cfg: SchemeConfig) -> tuple[VectorState, GridFunction]:
    """
    Advance the component levels and compose

    Returns:
        (new component state, composed y^{n+1})

    Raises:
        SingularRestrictedSystemError: When a weight vanishes inside a declared support
    """
    if state.p != restrictions.p:
        raise DimensionMismatchError(f"State has {state.p} components, restrictions {restrictions.p}")
    composed = restrictions.compose(state.components)
    steps = _increments(a, restrictions, composed, cfg)
    components = tuple(y + d for y, d in zip(state.components, steps))
    return VectorState(components), restrictions.compose(components)


def subdomain_step_422(a: SparseOperator, restrictions: RestrictionFamily, y_n: GridFunction,
                       cfg: SchemeConfig) -> GridFunction:
    """Every component stepped from the shared composed y^n, then composed again"""
    y = np.asarray(y_n, dtype=np.float64)
    steps = _increments(a, restrictions, y, cfg)
    return sum_in_order([w * (y + d) for w, d in zip(restrictions.weights, steps)])
