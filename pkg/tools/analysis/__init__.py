"""
Reference solutions, run monitors and convergence-order estimation.
"""

from .records import CSV_COLUMNS, RunRecord, certified_norm_margin
from .reference import (DenseReference, component_system_reference, dense_expm_reference, dense_wave_reference,
                        fine_reference)
from .monitors import AprioriCheck, apriori_check_thm1, forcing_norm_squared, run_scheme
from .convergence import OrderEstimate, estimate_order

__all__ = [
    'CSV_COLUMNS', 'RunRecord', 'certified_norm_margin',
    'DenseReference', 'component_system_reference', 'dense_expm_reference', 'dense_wave_reference', 'fine_reference',
    'AprioriCheck', 'apriori_check_thm1', 'forcing_norm_squared', 'run_scheme',
    'OrderEstimate', 'estimate_order',
]
