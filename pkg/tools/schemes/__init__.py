"""
Time-stepping schemes: two-level, splitting, subdomain, component-space,
second-order and system splittings, plus the stateful steppers around them.
"""

from .config import FORCED_KINDS, Ordering, SchemeConfig, SchemeKind, stability_threshold
from .shifted_solve import map_components, solve_restricted, solve_shifted
from .two_level import factorized_norm, factorized_step, forcing_at_sigma, weighted_step
from .splitting import (VectorState, additive_averaged_step, componentwise_sweep, regularized_averaged_step,
                        regularized_step, vector_additive_energy, vector_additive_step)
from .subdomain import subdomain_step_418, subdomain_step_422
from .component_space import (component_space_start, component_space_step_3level, component_space_step_57,
                              initial_components)
from .second_order import (damped_operator, energy_weight, second_order_energy, second_order_regularized_step,
                           second_order_start)
from .systems import SplitVariant, SystemState, system_split_step
from .steppers import STEPPERS, BaseStepper, ModelProblem, build_stepper

__all__ = [
    'FORCED_KINDS', 'Ordering', 'SchemeConfig', 'SchemeKind', 'stability_threshold',
    'map_components', 'solve_restricted', 'solve_shifted',
    'factorized_norm', 'factorized_step', 'forcing_at_sigma', 'weighted_step',
    'VectorState', 'additive_averaged_step', 'componentwise_sweep', 'regularized_averaged_step',
    'regularized_step', 'vector_additive_energy', 'vector_additive_step',
    'subdomain_step_418', 'subdomain_step_422',
    'component_space_start', 'component_space_step_3level', 'component_space_step_57', 'initial_components',
    'damped_operator', 'energy_weight', 'second_order_energy', 'second_order_regularized_step',
    'second_order_start',
    'SplitVariant', 'SystemState', 'system_split_step',
    'STEPPERS', 'BaseStepper', 'ModelProblem', 'build_stepper',
]
