"""
Parabolic model problem: grid, coefficient, operator assembly and exact references.
"""

from .grid import Grid2D
from .coefficient import Coefficient, GridForcing, weighted_forcing
from .expression import compile_expression
from .assembly import assemble_A, assemble_directional, spectral_lower_bound, spectral_upper_bound
from .reference import (directional_eigenvalues, eigenmode_reference, eigenvalue, eigenvector,
                        wave_eigenmode_reference)

__all__ = [
    'Grid2D', 'Coefficient', 'GridForcing', 'weighted_forcing', 'compile_expression',
    'assemble_A', 'assemble_directional', 'spectral_lower_bound', 'spectral_upper_bound',
    'directional_eigenvalues', 'eigenmode_reference', 'eigenvalue', 'eigenvector',
    'wave_eigenmode_reference',
]
