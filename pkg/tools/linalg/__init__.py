"""
Sparse linear algebra: operators, weighted norms and the conjugate-gradient solver.
"""

from .sparse_operator import GridFunction, SparseOperator, apply, as_grid_function, block_operator
from .krylov import (CGResult, cg_solve, conjugate_gradient, operator_norm_estimate,
                     rayleigh_quotients, smallest_eigenvalue_estimate)
from .norms import NormKind, NormTag, euclidean_norm, weighted_inner, weighted_norm

__all__ = [
    'GridFunction', 'SparseOperator', 'apply', 'as_grid_function', 'block_operator',
    'CGResult', 'cg_solve', 'conjugate_gradient', 'operator_norm_estimate',
    'rayleigh_quotients', 'smallest_eigenvalue_estimate',
    'NormKind', 'NormTag', 'euclidean_norm', 'weighted_inner', 'weighted_norm',
]
