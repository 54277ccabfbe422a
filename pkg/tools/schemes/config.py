"""Scheme identifiers, step configuration and stability thresholds."""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from tools.linalg.krylov import DEFAULT_MAX_ITER, DEFAULT_REL_TOL


class SchemeKind(str, Enum):
    WEIGHTED = "WEIGHTED"
    FACTORIZED = "FACTORIZED"
    COMPONENTWISE = "COMPONENTWISE"
    COMPONENTWISE_SYMMETRIZED = "COMPONENTWISE_SYMMETRIZED"
    ADDITIVE_AVERAGED = "ADDITIVE_AVERAGED"
    REGULARIZED = "REGULARIZED"
    VECTOR_ADDITIVE = "VECTOR_ADDITIVE"
    SUBDOMAIN_418 = "SUBDOMAIN_418"
    SUBDOMAIN_422 = "SUBDOMAIN_422"
    COMPONENT_SPACE_57 = "COMPONENT_SPACE_57"
    COMPONENT_SPACE_3LEVEL = "COMPONENT_SPACE_3LEVEL"
    SECOND_ORDER_REGULARIZED = "SECOND_ORDER_REGULARIZED"
    SYSTEM_ROW_SPLIT = "SYSTEM_ROW_SPLIT"
    SYSTEM_COLUMN_SPLIT = "SYSTEM_COLUMN_SPLIT"


class Ordering(str, Enum):
    FORWARD = "FORWARD"   # A1 -> ... -> Ap
    STRANG = "STRANG"     # A1 -> ... -> Ap -> Ap -> ... -> A1 on half steps


# kinds whose step functions accept a nonzero right-hand side
FORCED_KINDS = frozenset({
    SchemeKind.WEIGHTED, SchemeKind.FACTORIZED, SchemeKind.COMPONENTWISE,
    SchemeKind.COMPONENTWISE_SYMMETRIZED, SchemeKind.ADDITIVE_AVERAGED, SchemeKind.REGULARIZED,
    SchemeKind.VECTOR_ADDITIVE, SchemeKind.SECOND_ORDER_REGULARIZED,
})


class SchemeConfig(BaseModel):
    """Everything a step function needs besides the operators and the state"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SchemeKind = Field(description="Scheme identifier")
    sigma: float = Field(description="Weight of the new time level")
    tau: float = Field(gt=0, description="Time step")
    steps: int = Field(default=0, ge=0, description="Number of steps N")
    rel_tol: float = Field(default=DEFAULT_REL_TOL, gt=0, lt=1, description="CG relative residual target")
    max_iter: int = Field(default=DEFAULT_MAX_ITER, ge=1, description="CG iteration cap")
    ordering: Ordering = Field(default=Ordering.FORWARD, description="Sweep order for component-wise schemes")
    workers: int = Field(default=1, ge=1, description="Threads for independent sub-problems")

    @property
    def t_final(self) -> float:
        return self.steps * self.tau

    def with_tau(self, tau: float) -> 'SchemeConfig':
        return self.model_copy(update={"tau": tau})


def stability_threshold(kind: SchemeKind, p: int) -> float:
    """
    Smallest σ for which the scheme is unconditionally stable with p summands

    The system splittings carry no stated threshold and report their implicit
    weight 1.
    """
    kind = SchemeKind(kind)
    if p < 1:
        raise ValueError(f"Component count must be positive, got {p}")
    if kind in (SchemeKind.WEIGHTED, SchemeKind.FACTORIZED, SchemeKind.COMPONENTWISE,
                SchemeKind.COMPONENTWISE_SYMMETRIZED, SchemeKind.ADDITIVE_AVERAGED):
        return 0.5
    if kind in (SchemeKind.REGULARIZED, SchemeKind.VECTOR_ADDITIVE, SchemeKind.SUBDOMAIN_418,
                SchemeKind.SUBDOMAIN_422, SchemeKind.COMPONENT_SPACE_57):
        return p / 2.0
    if kind in (SchemeKind.COMPONENT_SPACE_3LEVEL, SchemeKind.SECOND_ORDER_REGULARIZED):
        return p / 4.0
    return 1.0
