#!/usr/bin/env python3
"""
Reference Solutions
Dense oracles for small problems and fine Crank-Nicolson integrations.

The dense oracles diagonalize A with scipy.linalg.eigh and are capped at 1024
unknowns.
"""

import logging

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from tools.errors import DimensionMismatchError
from tools.decomposition.space_restriction import SpaceRestrictionFamily
from tools.linalg.sparse_operator import GridFunction, SparseOperator
from tools.schemes.config import SchemeConfig, SchemeKind
from tools.schemes.two_level import weighted_step

logger = logging.getLogger(__name__)

DENSE_LIMIT = 1024
SYMMETRY_TOL = 1e-12


def _eigensystem(a_dense: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a_dense = np.asarray(a_dense, dtype=np.float64)
    if a_dense.ndim != 2 or a_dense.shape[0] != a_dense.shape[1]:
        raise DimensionMismatchError(f"Dense reference needs a square matrix, got {a_dense.shape}")
    if a_dense.shape[0] > DENSE_LIMIT:
        raise DimensionMismatchError(f"Dense reference is capped at {DENSE_LIMIT} unknowns, got {a_dense.shape[0]}")
    scale = max(float(np.max(np.abs(a_dense))), 1e-300)
    if np.max(np.abs(a_dense - a_dense.T)) > SYMMETRY_TOL * scale:
        raise ValueError("Dense reference needs a symmetric matrix")
    return scipy.linalg.eigh(a_dense)


class DenseReference:
    """
    Diagonalize A once and evaluate e^{-tA} u^0 (or cos(t√A) u^0 when wave is
    set) at any t
    """

    def __init__(self, a_dense: np.ndarray, u0: GridFunction, wave: bool = False):
        self.u0 = np.asarray(u0, dtype=np.float64)
        self.eigenvalues, self.eigenvectors = _eigensystem(a_dense)
        if self.u0.shape != (self.eigenvalues.size,):
            raise DimensionMismatchError(f"u0 has shape {self.u0.shape}, operator has {self.eigenvalues.size} rows")
        self.wave = wave
        self._coords = self.eigenvectors.T @ self.u0

    def __call__(self, t: float) -> GridFunction:
        if t == 0.0:
            return self.u0.copy()
        if self.wave:
            factors = np.cos(t * np.sqrt(np.clip(self.eigenvalues, 0.0, None)))
        else:
            factors = np.exp(-t * self.eigenvalues)
        return self.eigenvectors @ (factors * self._coords)


def dense_expm_reference(a_dense: np.ndarray, u0: GridFunction, t: float) -> GridFunction:
    """e^{-tA} u^0"""
    return DenseReference(a_dense, u0)(t)


def dense_wave_reference(a_dense: np.ndarray, u0: GridFunction, t: float) -> GridFunction:
    """cos(t√A) u^0, the solution of u'' + Au = 0 with u'(0) = 0"""
    return DenseReference(a_dense, u0, wave=True)(t)


def _crank_nicolson(a: SparseOperator, u0: GridFunction, t_final: float, tau_ref: float) -> GridFunction:
    steps = max(1, int(round(t_final / tau_ref)))
    cfg = SchemeConfig(kind=SchemeKind.WEIGHTED, sigma=0.5, tau=t_final / steps, steps=steps)
    y = np.asarray(u0, dtype=np.float64)
    for _ in range(steps):
        y = weighted_step(a, y, None, None, cfg)
    return y


def fine_reference(a: SparseOperator, u0: GridFunction, t_final: float, tau_ref: float) -> GridFunction:
    """Crank-Nicolson on du/dt + Au = 0 with a step close to tau_ref"""
    return _crank_nicolson(a, u0, t_final, tau_ref)


def component_system_reference(a: SparseOperator, g_family: SpaceRestrictionFamily, u0: GridFunction,
                               t_final: float, tau_ref: float) -> GridFunction:
    """
    Integrate the stacked component system du_α/dt + G_α A Σ_β G_β* u_β = 0 from
    u_α(0) = G_α u^0 by Crank-Nicolson and compose Σ G_α* u_α
    """
    g = sp.vstack([op.matrix for op in g_family.operators], format="csr")
    stacked = g @ a.matrix @ g.T
    system = SparseOperator(0.5 * (stacked + stacked.T), True, "GAG*")
    y = _crank_nicolson(system, g @ np.asarray(u0, dtype=np.float64), t_final, tau_ref)
    return np.asarray(g.T @ y)
