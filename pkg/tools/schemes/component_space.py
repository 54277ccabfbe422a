"""Schemes whose components live in their own spaces H_α, coupled through G_α."""

import logging

import numpy as np

from tools.errors import DimensionMismatchError
from tools.decomposition.space_restriction import SpaceRestrictionFamily
from tools.linalg.krylov import cg_solve
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply
from tools.schemes.config import SchemeConfig
from tools.schemes.shifted_solve import map_components
from tools.schemes.splitting import VectorState

logger = logging.getLogger(__name__)


def initial_components(g_family: SpaceRestrictionFamily, u0: GridFunction) -> VectorState:
    """y_α^0 = G_α u^0"""
    return VectorState(tuple(g_family.restrict_all(np.asarray(u0, dtype=np.float64))))


def _check(g_family: SpaceRestrictionFamily, state: VectorState) -> None:
    if state.p != g_family.p:
        raise DimensionMismatchError(f"State has {state.p} components, G family has {g_family.p}")


def component_space_step_57(a: SparseOperator, g_family: SpaceRestrictionFamily, state: VectorState,
                            cfg: SchemeConfig) -> tuple[VectorState, GridFunction]:
    """
    (y_α^{n+1} - y_α^n)/τ + σ G_α A G_α*(y_α^{n+1} - y_α^n) + G_α A Σ_β G_β* y_β^n = 0

    Returns:
        (new component state, composed Σ G_α* y_α^{n+1})
    """
    _check(g_family, state)
    coupling = apply(a, g_family.compose(state.components))
    c = cfg.sigma * cfg.tau

    def component(alpha: int) -> GridFunction:
        rhs = -cfg.tau * g_family.restrict(alpha, coupling)
        local = g_family.local_operator(a, alpha)
        return state.components[alpha] + cg_solve(local.shifted_identity(c), rhs, cfg.rel_tol, cfg.max_iter)

    components = tuple(map_components(component, g_family.p, cfg.workers))
    return VectorState(components, state.components), g_family.compose(components)


def component_space_start(a: SparseOperator, g_family: SpaceRestrictionFamily, u0: GridFunction,
                          cfg: SchemeConfig) -> tuple[VectorState, GridFunction]:
    """Two levels for the three-level scheme: y^0 = G u^0 and one two-level step with the same τ and σ"""
    return component_space_step_57(a, g_family, initial_components(g_family, u0), cfg)


def component_space_step_3level(a: SparseOperator, g_family: SpaceRestrictionFamily, state: VectorState,
                                cfg: SchemeConfig) -> tuple[VectorState, GridFunction]:
    """
    Three-level scheme, second order in τ and stable for σ >= p/4

        (y_α^{n+1} - y_α^{n-1})/(2τ) + σ G_α A G_α*(y_α^{n+1} - 2y_α^n + y_α^{n-1})
            + G_α A Σ_β G_β* y_β^n = 0

    state.components hold level n and state.previous level n-1. Solved for
    Δ = y^{n+1} - y^n with δ = y^n - y^{n-1}:
        (I + 2στL) Δ = -δ + 2στ L δ - 2τ G A u^n
    """
    _check(g_family, state)
    if state.previous is None:
        raise DimensionMismatchError("Three-level step needs the previous level; use component_space_start")
    coupling = apply(a, g_family.compose(state.components))
    c = 2.0 * cfg.sigma * cfg.tau

    def component(alpha: int) -> GridFunction:
        local = g_family.local_operator(a, alpha)
        delta = state.components[alpha] - state.previous[alpha]
        rhs = c * apply(local, delta) - delta - 2.0 * cfg.tau * g_family.restrict(alpha, coupling)
        return state.components[alpha] + cg_solve(local.shifted_identity(c), rhs, cfg.rel_tol, cfg.max_iter)

    components = tuple(map_components(component, g_family.p, cfg.workers))
    return VectorState(components, state.components), g_family.compose(components)
