#!/usr/bin/env python3
"""
Experiment Configuration
Strict pydantic schema for one experiment JSON document.

Unknown keys are rejected everywhere. Cross-field rules (scheme vs
decomposition, reference vs initial data, forcing support) live in the
model validators so a config is fully checked before anything is assembled.
"""

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from tools.errors import ConfigError
from tools.decomposition.partition import PartitionProfile
from tools.linalg.krylov import DEFAULT_MAX_ITER, DEFAULT_REL_TOL
from tools.parabolic.expression import compile_expression
from tools.parabolic.reference import check_mode
from tools.parabolic.grid import Grid2D
from tools.schemes.config import FORCED_KINDS, Ordering, SchemeConfig, SchemeKind

logger = logging.getLogger(__name__)

DENSE_LIMIT = 1024


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSpec(StrictModel):
    l1: float = Field(default=1.0, gt=0, description="Domain length along x1")
    l2: float = Field(default=1.0, gt=0, description="Domain length along x2")
    n1: int = Field(ge=2, description="Subdivisions along x1")
    n2: int = Field(ge=2, description="Subdivisions along x2")

    def build(self) -> Grid2D:
        return Grid2D(self.l1, self.l2, self.n1, self.n2)


class ConstantCoefficient(StrictModel):
    type: Literal["CONSTANT"]
    value: float = Field(gt=0)


class CheckerboardCoefficient(StrictModel):
    type: Literal["CHECKERBOARD"]
    high: float = Field(gt=0)
    low: float = Field(gt=0)
    cells: int = Field(default=2, ge=1)


class ExpressionCoefficient(StrictModel):
    type: Literal["EXPRESSION"]
    text: str = Field(min_length=1, description="Expression of x1, x2")
    kappa: Optional[float] = Field(default=None, gt=0, description="Claimed lower bound")

    @model_validator(mode="after")
    def check_grammar(self) -> 'ExpressionCoefficient':
        compile_expression(self.text, ("x1", "x2"))
        return self


CoefficientSpec = Annotated[Union[ConstantCoefficient, CheckerboardCoefficient, ExpressionCoefficient],
                            Field(discriminator="type")]


class DecompositionKind(str, Enum):
    NONE = "NONE"
    DIRECTIONAL = "DIRECTIONAL"
    CHI_A = "CHI_A"
    A_CHI = "A_CHI"
    R_A = "R_A"
    A_R = "A_R"
    D_R_D = "D_R_D"
    RESTRICTION = "RESTRICTION"
    SPACE_RESTRICTION = "SPACE_RESTRICTION"


class VectorRestriction(str, Enum):
    EDGES = "EDGES"             # nodal partition carried to edges
    DIRECTIONS = "DIRECTIONS"   # block-diag(I, 0), block-diag(0, I)


OPERATOR_FAMILY_KINDS = frozenset({
    DecompositionKind.NONE, DecompositionKind.DIRECTIONAL, DecompositionKind.CHI_A, DecompositionKind.A_CHI,
    DecompositionKind.R_A, DecompositionKind.A_R, DecompositionKind.D_R_D,
})


class DecompositionSpec(StrictModel):
    kind: DecompositionKind = DecompositionKind.NONE
    p: int = Field(default=1, ge=1, description="Number of strips")
    overlap: int = Field(default=0, ge=0, description="Shared columns per interface")
    profile: PartitionProfile = PartitionProfile.HARD
    vector: VectorRestriction = VectorRestriction.EDGES

    @property
    def effective_p(self) -> int:
        if self.kind == DecompositionKind.NONE:
            return 1
        if self.kind == DecompositionKind.DIRECTIONAL or (
                self.kind == DecompositionKind.D_R_D and self.vector == VectorRestriction.DIRECTIONS):
            return 2
        return self.p

    @property
    def uses_partition(self) -> bool:
        return self.effective_p == self.p and self.kind not in (DecompositionKind.NONE, DecompositionKind.DIRECTIONAL)


class SchemeSpec(StrictModel):
    kind: SchemeKind
    sigma: float
    tau: float = Field(gt=0)
    steps: int = Field(ge=0)
    ordering: Ordering = Ordering.FORWARD
    rel_tol: float = Field(default=DEFAULT_REL_TOL, gt=0, lt=1)
    max_iter: int = Field(default=DEFAULT_MAX_ITER, ge=1)
    workers: int = Field(default=1, ge=1)

    def build(self, tau: Optional[float] = None, steps: Optional[int] = None) -> SchemeConfig:
        return SchemeConfig(kind=self.kind, sigma=self.sigma, tau=self.tau if tau is None else tau,
                            steps=self.steps if steps is None else steps, rel_tol=self.rel_tol,
                            max_iter=self.max_iter, ordering=self.ordering, workers=self.workers)


class EigenmodeInitial(StrictModel):
    type: Literal["EIGENMODE"]
    m1: int = Field(ge=1)
    m2: int = Field(ge=1)


class RandomInitial(StrictModel):
    type: Literal["RANDOM"]
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    generator: Literal["PCG64"] = "PCG64"


class ConstantInitial(StrictModel):
    type: Literal["CONSTANT"]
    value: float


InitialSpec = Annotated[Union[EigenmodeInitial, RandomInitial, ConstantInitial], Field(discriminator="type")]


class ZeroForcing(StrictModel):
    type: Literal["ZERO"]


class ExpressionForcing(StrictModel):
    type: Literal["EXPRESSION"]
    text: str = Field(min_length=1, description="Expression of x1, x2, t")

    @model_validator(mode="after")
    def check_grammar(self) -> 'ExpressionForcing':
        compile_expression(self.text, ("x1", "x2", "t"))
        return self


ForcingSpec = Annotated[Union[ZeroForcing, ExpressionForcing], Field(discriminator="type")]


class ReferenceKind(str, Enum):
    EIGENMODE = "EIGENMODE"
    EXPM = "EXPM"
    NONE = "NONE"


class ReferenceSpec(StrictModel):
    kind: ReferenceKind = ReferenceKind.NONE


class OrdersSpec(StrictModel):
    levels: int = Field(default=4, ge=3)
    tau0: Optional[float] = Field(default=None, gt=0, description="Coarsest step; defaults to scheme.tau")
    max_workers: int = Field(default=1, ge=1)


class OutputSpec(StrictModel):
    directory: Optional[str] = Field(default=None, description="Overrides output/<name>")
    timing: bool = Field(default=False, description="Measure step_seconds")
    orders: Optional[OrdersSpec] = None


class SystemSpec(StrictModel):
    coupling: float = Field(description="A12 = A21 = coupling·I")
    a22_scale: float = Field(default=1.0, gt=0, description="A22 = a22_scale·A")


SYSTEM_KINDS = frozenset({SchemeKind.SYSTEM_ROW_SPLIT, SchemeKind.SYSTEM_COLUMN_SPLIT})
SECOND_ORDER_KINDS = frozenset({SchemeKind.SECOND_ORDER_REGULARIZED})


class ExperimentConfig(StrictModel):
    name: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    grid: GridSpec
    coefficient: CoefficientSpec
    decomposition: DecompositionSpec = DecompositionSpec()
    scheme: SchemeSpec
    initial: InitialSpec
    forcing: ForcingSpec = ZeroForcing(type="ZERO")
    reference: ReferenceSpec = ReferenceSpec()
    outputs: OutputSpec = OutputSpec()
    system: Optional[SystemSpec] = None

    @property
    def is_system(self) -> bool:
        return self.scheme.kind in SYSTEM_KINDS

    @model_validator(mode="after")
    def check_decomposition(self) -> 'ExperimentConfig':
        kind, decomposition = self.scheme.kind, self.decomposition
        d = decomposition.kind
        if kind == SchemeKind.WEIGHTED or kind in SYSTEM_KINDS:
            allowed = {DecompositionKind.NONE}
        elif kind == SchemeKind.FACTORIZED:
            allowed = {DecompositionKind.DIRECTIONAL, DecompositionKind.D_R_D}
        elif kind in (SchemeKind.SUBDOMAIN_418, SchemeKind.SUBDOMAIN_422):
            allowed = {DecompositionKind.NONE, DecompositionKind.RESTRICTION}
        elif kind in (SchemeKind.COMPONENT_SPACE_57, SchemeKind.COMPONENT_SPACE_3LEVEL):
            allowed = {DecompositionKind.SPACE_RESTRICTION}
        else:
            allowed = OPERATOR_FAMILY_KINDS
        if d not in allowed:
            raise ValueError(f"decomposition.kind {d.value} does not fit scheme {kind.value}; "
                             f"expected one of {sorted(a.value for a in allowed)}")
        if kind == SchemeKind.FACTORIZED and decomposition.effective_p != 2:
            raise ValueError("FACTORIZED needs exactly two summands")
        if decomposition.uses_partition and decomposition.p > self.grid.n1 - 1:
            raise ValueError(f"decomposition.p={decomposition.p} exceeds {self.grid.n1 - 1} interior columns")
        return self

    @model_validator(mode="after")
    def check_system(self) -> 'ExperimentConfig':
        if self.is_system and self.system is None:
            raise ValueError(f"{self.scheme.kind.value} requires a system block")
        if not self.is_system and self.system is not None:
            raise ValueError("system block is only valid for SYSTEM_* schemes")
        return self

    @model_validator(mode="after")
    def check_forcing_and_reference(self) -> 'ExperimentConfig':
        forced = self.forcing.type != "ZERO"
        if forced and self.scheme.kind not in FORCED_KINDS:
            raise ValueError(f"{self.scheme.kind.value} implements only the homogeneous problem; use ZERO forcing")
        if forced and self.is_system:
            raise ValueError("system splittings take ZERO forcing")
        grid = self.grid.build()
        if isinstance(self.initial, EigenmodeInitial):
            check_mode(grid, (self.initial.m1, self.initial.m2))
        reference = self.reference.kind
        if reference != ReferenceKind.NONE and forced:
            raise ValueError(f"reference {reference.value} needs ZERO forcing")
        if reference == ReferenceKind.EIGENMODE:
            if not isinstance(self.initial, EigenmodeInitial):
                raise ValueError("EIGENMODE reference needs EIGENMODE initial data")
            if not isinstance(self.coefficient, ConstantCoefficient):
                raise ValueError("EIGENMODE reference needs a CONSTANT coefficient")
            if self.is_system:
                raise ValueError("EIGENMODE reference is not available for systems; use EXPM")
        if reference == ReferenceKind.EXPM:
            size = grid.size * (2 if self.is_system else 1)
            if size > DENSE_LIMIT:
                raise ValueError(f"EXPM reference is capped at {DENSE_LIMIT} unknowns, config has {size}")
        if self.outputs.orders is not None and reference == ReferenceKind.NONE:
            raise ValueError("outputs.orders needs a reference")
        return self


def _line_of(text: str, loc: tuple) -> Optional[int]:
    """Best-effort line of the innermost named key of a validation location"""
    for key in reversed(loc):
        if isinstance(key, str):
            position = text.find(f'"{key}"')
            if position >= 0:
                return text.count("\n", 0, position) + 1
    return None


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """
    Parse and validate one experiment document

    Raises:
        ConfigError: With one "source:line: field: message" diagnostic per problem
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}",
                          [f"{source}:{e.lineno}:{e.colno}: {e.msg}"]) from e
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        diagnostics = []
        for error in e.errors():
            loc = tuple(error["loc"])
            field = ".".join(str(part) for part in loc) or "<root>"
            line = _line_of(text, loc)
            where = f"{source}:{line}" if line is not None else source
            diagnostics.append(f"{where}: {field}: {error['msg']}")
        raise ConfigError(f"{source}: {len(diagnostics)} validation error(s)", diagnostics) from e
    except ConfigError as e:
        raise ConfigError(f"{source}: {e}", [f"{source}: {e}"]) from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}", [str(e)]) from e
    config = parse_config(text, str(path))
    logger.info(f"📁 Loaded config {config.name} from {path}")
    return config
