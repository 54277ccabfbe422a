#!/usr/bin/env python3
"""
Steppers
Stateful drivers around the pure step functions, one subclass per scheme kind.

A stepper owns the current level(s) and the step counter; the step functions
it calls never mutate their inputs.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Any, ClassVar, Optional, Union

import numpy as np

from tools.errors import ConfigError, DecompositionError
from tools.decomposition.operator_family import OperatorFamily, trivial_family
from tools.decomposition.partition import RestrictionFamily
from tools.decomposition.space_restriction import SpaceRestrictionFamily
from tools.linalg.norms import NormKind, euclidean_norm, weighted_norm
from tools.linalg.sparse_operator import GridFunction, SparseOperator, as_grid_function
from tools.parabolic.assembly import assemble_A
from tools.parabolic.coefficient import Coefficient, GridForcing
from tools.parabolic.grid import Grid2D
from tools.schemes.component_space import (component_space_start, component_space_step_3level,
                                           component_space_step_57, initial_components)
from tools.schemes.config import FORCED_KINDS, Ordering, SchemeConfig, SchemeKind
from tools.schemes.second_order import (energy_weight, second_order_energy, second_order_regularized_step,
                                        second_order_start)
from tools.schemes.splitting import (VectorState, additive_averaged_step, componentwise_sweep,
                                     regularized_step, vector_additive_energy, vector_additive_step)
from tools.schemes.subdomain import subdomain_step_418, subdomain_step_422
from tools.schemes.systems import SplitVariant, SystemState, system_split_step
from tools.schemes.two_level import factorized_norm, factorized_step, forcing_at_sigma, weighted_step

logger = logging.getLogger(__name__)

Decomposition = Union[OperatorFamily, RestrictionFamily, SpaceRestrictionFamily, SystemState, None]


@dataclass(frozen=True, eq=False)
class ModelProblem:
    """Operator A with its grid, coefficient and optional forcing f(t)"""
    operator: SparseOperator
    grid: Optional[Grid2D] = None
    coefficient: Optional[Coefficient] = None
    forcing: Optional[GridForcing] = None

    @classmethod
    def assemble(cls, grid: Grid2D, k: Coefficient, forcing: Optional[GridForcing] = None) -> 'ModelProblem':
        return cls(assemble_A(grid, k), grid, k, forcing)

    @property
    def size(self) -> int:
        return self.operator.rows

    @property
    def homogeneous(self) -> bool:
        return self.forcing is None or self.forcing.is_zero

    def forcing_at(self, t: float) -> Optional[GridFunction]:
        return None if self.homogeneous else self.forcing(t)


class BaseStepper(ABC):
    """
    Abstract driver for one scheme

    Subclasses must implement:
    - advance(): move the owned state one step forward
    - solution(): the approximation of u at the current level
    - certified_norm(): the norm the scheme's stability estimate controls
    """
    kind: ClassVar[SchemeKind]

    def __init__(self, problem: ModelProblem, decomposition: Decomposition, config: SchemeConfig,
                 u0: GridFunction):
        if not problem.homogeneous and config.kind not in FORCED_KINDS:
            raise ConfigError(f"{config.kind.value} implements only the homogeneous problem")
        self.problem = problem
        self.decomposition = decomposition
        self.config = config
        self.u0 = as_grid_function(u0, self.operator.rows)
        self.n = 0

    @property
    def operator(self) -> SparseOperator:
        return self.problem.operator

    @property
    def t(self) -> float:
        return self.n * self.config.tau

    @property
    def p(self) -> int:
        return getattr(self.decomposition, "p", 1)

    @abstractmethod
    def advance(self) -> None:
        pass

    @abstractmethod
    def solution(self) -> GridFunction:
        pass

    @abstractmethod
    def certified_norm(self) -> float:
        pass

    def step(self) -> GridFunction:
        self.advance()
        self.n += 1
        return self.solution()

    def _family(self, minimum: int = 1) -> OperatorFamily:
        family = self.decomposition
        if family is None:
            family = trivial_family(self.operator)
        if not isinstance(family, OperatorFamily):
            raise DecompositionError(f"{self.kind.value} needs an operator family, got {type(family).__name__}")
        if family.p < minimum:
            raise DecompositionError(f"{self.kind.value} needs at least {minimum} summands, got {family.p}")
        return family


class WeightedStepper(BaseStepper):
    kind = SchemeKind.WEIGHTED

    def __init__(self, problem, decomposition, config, u0):
        super().__init__(problem, decomposition, config, u0)
        self.y = self.u0.copy()

    def advance(self) -> None:
        f_n = self.problem.forcing_at(self.t)
        f_np1 = self.problem.forcing_at(self.t + self.config.tau)
        self.y = weighted_step(self.operator, self.y, f_n, f_np1, self.config)

    def solution(self) -> GridFunction:
        return self.y

    def certified_norm(self) -> float:
        return weighted_norm(self.y, NormKind.energy(self.operator))


class FactorizedStepper(WeightedStepper):
    kind = SchemeKind.FACTORIZED

    def __init__(self, problem, decomposition, config, u0):
        super().__init__(problem, decomposition, config, u0)
        self.family = self._family()
        if self.family.p != 2:
            raise DecompositionError(f"Factorized scheme needs two summands, got {self.family.p}")

    def advance(self) -> None:
        f_n = self.problem.forcing_at(self.t)
        f_np1 = self.problem.forcing_at(self.t + self.config.tau)
        a1, a2 = self.family.summands
        self.y = factorized_step(a1, a2, self.y, f_n, f_np1, self.config)

    def certified_norm(self) -> float:
        return factorized_norm(self.family.summands[1], self.y, self.config.sigma, self.config.tau)


class ComponentwiseStepper(WeightedStepper):
    kind = SchemeKind.COMPONENTWISE
    ordering: ClassVar[Optional[Ordering]] = None

    def __init__(self, problem, decomposition, config, u0):
        super().__init__(problem, decomposition, config, u0)
        self.family = self._family()

    def _forcing_parts(self) -> list:
        f = forcing_at_sigma(self.problem.forcing_at(self.t), self.problem.forcing_at(self.t + self.config.tau),
                             self.config.sigma)
        return self.family.split_forcing(f)

    def advance(self) -> None:
        self.y = componentwise_sweep(self.family, self.y, self._forcing_parts(), self.config, self.ordering)

    def certified_norm(self) -> float:
        return weighted_norm(self.y, energy_weight(self.family))


class SymmetrizedComponentwiseStepper(ComponentwiseStepper):
    kind = SchemeKind.COMPONENTWISE_SYMMETRIZED
    ordering = Ordering.STRANG


class AdditiveAveragedStepper(ComponentwiseStepper):
    kind = SchemeKind.ADDITIVE_AVERAGED

    def advance(self) -> None:
        self.y = additive_averaged_step(self.family, self.y, self._forcing_parts(), self.config)


class RegularizedStepper(ComponentwiseStepper):
    kind = SchemeKind.REGULARIZED

    def advance(self) -> None:
        f = forcing_at_sigma(self.problem.forcing_at(self.t), self.problem.forcing_at(self.t + self.config.tau),
                             self.config.sigma)
        self.y = regularized_step(self.family, self.y, f, self.config)


class VectorAdditiveStepper(BaseStepper):
    kind = SchemeKind.VECTOR_ADDITIVE

    def __init__(self, problem, decomposition, config, u0):
        super().__init__(problem, decomposition, config, u0)
        self.family = self._family()
        self.state = VectorState.replicated(self.u0, self.family.p)

    def advance(self) -> None:
        self.state = vector_additive_step(self.family, self.state, self.problem.forcing_at(self.t), self.config)

    def solution(self) -> GridFunction:
        return self.state.components[0]

    def certified_norm(self) -> float:
        return vector_additive_energy(self.family, self.state)


class _EnergyCertified(BaseStepper):
    """Schemes whose estimate controls ‖y‖_A of the composed solution"""

    def solution(self) -> GridFunction:
        return self.y

    def certified_norm(self) -> float:
        return weighted_norm(self.y, NormKind.energy(self.operator))

    def _restrictions(self) -> RestrictionFamily:
        if self.decomposition is None:
            return RestrictionFamily(np.ones((1, self.operator.rows)))
        if not isinstance(self.decomposition, RestrictionFamily) or self.decomposition.space != "H":
            raise DecompositionError(f"{self.kind.value} needs a restriction family on H")
        return self.decomposition

    def _space_restrictions(self) -> SpaceRestrictionFamily:
        if not isinstance(self.decomposition, SpaceRestrictionFamily):
            raise DecompositionError(f"{self.kind.value} needs a space restriction family")
        return self.decomposition


class Subdomain418Stepper(_EnergyCertified):
    kind = SchemeKind.SUBDOMAIN_418

    def __init__(self, problem, decomposition, config, u0):
        super().__init__(problem, decomposition, config, u0)
        self.restrictions = self._restrictions()
        self.state = VectorState.replicated(self.u0, self.restrictions.p)
        self.y = self.restrictions.compose(self.state.components)

    def advance(self) -> None:
        self.state, self.y = subdomain_step_418(self.operator, self.restrictions, self.state, self.config)


class Subdomain422Stepper(_EnergyCertified):
    kind = SchemeKind.SUBDOMAIN_422

    def __init__(self, problem, decomposition, config, u0):
        super().__init__(problem, decomposition, config, u0)
        self.restrictions = self._restrictions()
        self.y = self.u0.copy()

    def advance(self) -> None:
        self.y = subdomain_step_422(self.operator, self.restrictions, self.y, self.config)


class ComponentSpace57Stepper(_EnergyCertified):
    kind = SchemeKind.COMPONENT_SPACE_57

    def __init__(self, problem, decomposition, config, u0):
        super().__init__(problem, decomposition, config, u0)
        self.g_family = self._space_restrictions()
        self.state = initial_components(self.g_family, self.u0)
        self.y = self.g_family.compose(self.state.components)

    def advance(self) -> None:
        self.state, self.y = component_space_step_57(self.operator, self.g_family, self.state, self.config)


class ComponentSpace3LevelStepper(ComponentSpace57Stepper):
    kind = SchemeKind.COMPONENT_SPACE_3LEVEL

    def advance(self) -> None:
        if self.n == 0:
            self.state, self.y = component_space_start(self.operator, self.g_family, self.u0, self.config)
        else:
            self.state, self.y = component_space_step_3level(self.operator, self.g_family, self.state,
                                                             self.config)


class SecondOrderStepper(BaseStepper):
    """u'' + Au = f from u(0) = u^0, u'(0) = v^0; the certified norm is the discrete energy"""
    kind = SchemeKind.SECOND_ORDER_REGULARIZED

    def __init__(self, problem, decomposition, config, u0, v0: Optional[GridFunction] = None):
        super().__init__(problem, decomposition, config, u0)
        self.family = self._family()
        self.v0 = None if v0 is None else as_grid_function(v0, self.operator.rows)
        self.y_prev: Optional[GridFunction] = None
        self.y = self.u0.copy()

    def advance(self) -> None:
        if self.n == 0:
            y_next = second_order_start(self.operator, self.u0, self.v0, self.problem.forcing_at(0.0),
                                        self.config.tau)
        else:
            y_next = second_order_regularized_step(self.family, self.y_prev, self.y,
                                                   self.problem.forcing_at(self.t), self.config)
        self.y_prev, self.y = self.y, y_next

    def solution(self) -> GridFunction:
        return self.y

    def certified_norm(self) -> float:
        if self.y_prev is None:
            return float("nan")
        return second_order_energy(self.family, self.y_prev, self.y, self.config)


class SystemStepper(BaseStepper):
    """Row or column splitting of a 2x2 operator matrix; u0 is the stacked (u1, u2)"""
    variant: ClassVar[SplitVariant]

    def __init__(self, problem, decomposition, config, u0):
        if not isinstance(decomposition, SystemState):
            raise DecompositionError(f"{config.kind.value} needs the operator blocks as a SystemState")
        super().__init__(problem, decomposition, config, u0)
        n1 = decomposition.a11.rows
        self.system = replace(decomposition, u1=self.u0[:n1].copy(), u2=self.u0[n1:].copy())

    def advance(self) -> None:
        self.system = system_split_step(self.system, self.variant, self.config)

    def solution(self) -> GridFunction:
        return self.system.stacked()

    def certified_norm(self) -> float:
        return euclidean_norm(self.solution())


class RowSplitStepper(SystemStepper):
    kind = SchemeKind.SYSTEM_ROW_SPLIT
    variant = SplitVariant.ROW


class ColumnSplitStepper(SystemStepper):
    kind = SchemeKind.SYSTEM_COLUMN_SPLIT
    variant = SplitVariant.COLUMN


STEPPERS: dict[SchemeKind, type[BaseStepper]] = {
    cls.kind: cls for cls in (
        WeightedStepper, FactorizedStepper, ComponentwiseStepper, SymmetrizedComponentwiseStepper,
        AdditiveAveragedStepper, RegularizedStepper, VectorAdditiveStepper, Subdomain418Stepper,
        Subdomain422Stepper, ComponentSpace57Stepper, ComponentSpace3LevelStepper, SecondOrderStepper,
        RowSplitStepper, ColumnSplitStepper,
    )
}


def build_stepper(problem: ModelProblem, decomposition: Decomposition, config: SchemeConfig,
                  u0: GridFunction, **extra: Any) -> BaseStepper:
    """
    Instantiate the stepper for config.kind

    Args:
        problem: Operator and forcing; for system kinds the block operator
        decomposition: OperatorFamily, RestrictionFamily, SpaceRestrictionFamily or
            SystemState, as the kind requires; None means the trivial family
        config: Scheme configuration
        u0: Initial data
        extra: v0 for the second-order scheme
    """
    stepper_class = STEPPERS[SchemeKind(config.kind)]
    logger.debug(f"Building {stepper_class.__name__} (σ={config.sigma}, τ={config.tau})")
    return stepper_class(problem, decomposition, config, u0, **extra)
