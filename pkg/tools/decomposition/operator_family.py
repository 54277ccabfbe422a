#!/usr/bin/env python3
"""
Operator Families
Additive decompositions A = Σ_α A_α built by each strategy the schemes accept.

Every constructor hands its summands to OperatorFamily, whose constructor
rejects any family that does not add back up to the base operator.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from tools.errors import DecompositionError, DimensionMismatchError
from tools.decomposition.factorized import FactorizedForm, edge_restrictions
from tools.decomposition.partition import PartitionOfUnity, RestrictionFamily
from tools.linalg.krylov import rayleigh_quotients
from tools.linalg.sparse_operator import GridFunction, SparseOperator
from tools.parabolic.assembly import assemble_A, assemble_directional
from tools.parabolic.coefficient import Coefficient
from tools.parabolic.grid import Grid2D

logger = logging.getLogger(__name__)

RECONSTRUCTION_TOL = 1e-12
PSD_TOL = 1e-10


class FamilyKind(str, Enum):
    DIRECTIONAL = "DIRECTIONAL"
    CHI_A = "CHI_A"
    A_CHI = "A_CHI"
    R_A = "R_A"
    A_R = "A_R"
    D_R_D = "D_R_D"
    SKEW_SPLIT = "SKEW_SPLIT"
    GENERIC = "GENERIC"


class Side(str, Enum):
    LEFT = "LEFT"     # A_α = W_α A
    RIGHT = "RIGHT"   # A_α = A W_α


def _exactly_symmetric(op: SparseOperator) -> bool:
    if op.rows != op.cols:
        return False
    gap = (op.matrix - op.matrix.T).tocsr()
    gap.eliminate_zeros()
    return gap.nnz == 0


def reconstruction_error(base: SparseOperator, summands: Sequence[SparseOperator]) -> float:
    """‖Σ A_α - A‖_F relative to ‖A‖_F, absolute when A = 0"""
    total = summands[0].matrix.copy()
    for op in summands[1:]:
        total = total + op.matrix
    gap = SparseOperator(total - base.matrix).frobenius_norm()
    scale = base.frobenius_norm()
    return gap / scale if scale > 0.0 else gap


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """
    Summands A_α of a base operator A.

    row_weights (col_weights) are set when A_α = diag(w_α)·A (A·diag(w_α)); the
    shifted solvers use them to work on the support of w_α only. supports are
    the declared supports of the restriction the family came from.
    forcing_weights split a right-hand side as f_α = w_α f; without them the
    split is f/p.
    """
    base: SparseOperator
    summands: tuple
    kind: FamilyKind
    selfadjoint: bool = False
    row_weights: Optional[np.ndarray] = None
    col_weights: Optional[np.ndarray] = None
    forcing_weights: Optional[np.ndarray] = None
    supports: Optional[tuple] = None
    label: str = ""

    def __post_init__(self):
        summands = tuple(self.summands)
        object.__setattr__(self, "summands", summands)
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if not summands:
            raise DecompositionError("An operator family needs at least one summand")
        for op in summands:
            if op.matrix.shape != self.base.matrix.shape:
                raise DimensionMismatchError(
                    f"Summand {op.name} has shape {op.matrix.shape}, base has {self.base.matrix.shape}")
        gap = reconstruction_error(self.base, summands)
        if gap > RECONSTRUCTION_TOL:
            raise DecompositionError(f"{self.kind.value} family misses A by {gap:.3e} relative")
        if self.selfadjoint and not all(_exactly_symmetric(op) for op in summands):
            raise DecompositionError(f"{self.kind.value} family claims symmetric summands but is not")
        for name in ("row_weights", "col_weights", "forcing_weights"):
            weights = getattr(self, name)
            if weights is not None and np.shape(weights) != (len(summands), self.base.rows):
                raise DimensionMismatchError(f"{name} must have shape ({len(summands)}, {self.base.rows})")
        logger.debug(f"{self.kind.value} family: p={len(summands)}, reconstruction gap {gap:.2e}")

    @property
    def p(self) -> int:
        return len(self.summands)

    @property
    def size(self) -> int:
        return self.base.rows

    def __getitem__(self, alpha: int) -> SparseOperator:
        return self.summands[alpha]

    def __len__(self) -> int:
        return len(self.summands)

    def split_forcing(self, f: Optional[GridFunction]) -> list:
        """Parts f_α with Σ f_α = f; None stays None"""
        if f is None:
            return [None] * self.p
        f = np.asarray(f, dtype=np.float64)
        if self.forcing_weights is None:
            return [f / self.p for _ in range(self.p)]
        return [w * f for w in self.forcing_weights]


def generic_family(base: SparseOperator, summands: Sequence[SparseOperator],
                   label: str = "") -> OperatorFamily:
    """Wrap caller-supplied summands, flagged symmetric only when every one is exactly so"""
    selfadjoint = all(_exactly_symmetric(op) for op in summands)
    if selfadjoint:
        summands = [SparseOperator(op.matrix, True, op.name) for op in summands]
    return OperatorFamily(base, tuple(summands), FamilyKind.GENERIC, selfadjoint, label=label)


def trivial_family(a: SparseOperator) -> OperatorFamily:
    """{A} itself, p = 1"""
    return OperatorFamily(a, (a,), FamilyKind.GENERIC, a.symmetric and _exactly_symmetric(a), label="trivial")


def split_directional(grid: Grid2D, k: Coefficient) -> OperatorFamily:
    """A1 holds every x1-direction term of the stencil, A2 every x2-direction term"""
    a = assemble_A(grid, k)
    parts = (assemble_directional(grid, k, 1), assemble_directional(grid, k, 2))
    return OperatorFamily(a, parts, FamilyKind.DIRECTIONAL, True, label="directional")


def _scaled_family(a: SparseOperator, weights: np.ndarray, side: Side, kinds: tuple,
                   forcing_weights: Optional[np.ndarray], supports: Optional[tuple],
                   label: str) -> OperatorFamily:
    side = Side(side)
    if weights.shape[1] != a.rows or a.rows != a.cols:
        raise DimensionMismatchError(f"Weights over {weights.shape[1]} nodes for a {a.rows}x{a.cols} operator")
    if side == Side.LEFT:
        summands = tuple(SparseOperator(a.scale_rows(w).matrix, False, f"R{i + 1}A")
                         for i, w in enumerate(weights))
        kind, row_weights, col_weights = kinds[0], weights, None
    else:
        summands = tuple(SparseOperator(a.scale_cols(w).matrix, False, f"AR{i + 1}")
                         for i, w in enumerate(weights))
        kind, row_weights, col_weights = kinds[1], None, weights
    # symmetric only in degenerate cases, e.g. p = 1 or supports not coupled by A
    selfadjoint = all(_exactly_symmetric(op) for op in summands)
    if selfadjoint:
        summands = tuple(SparseOperator(op.matrix, True, op.name) for op in summands)
    return OperatorFamily(a, summands, kind, selfadjoint, row_weights, col_weights,
                          forcing_weights, supports, label)


def decompose_chiA(a: SparseOperator, pou: PartitionOfUnity, side: Side = Side.LEFT) -> OperatorFamily:
    """
    A_α = χ_α A (LEFT) or A χ_α (RIGHT)

    Args:
        a: Problem operator over the partition's nodes
        pou: Partition of unity
        side: Which side the weights multiply

    Returns:
        OperatorFamily of kind CHI_A or A_CHI
    """
    return _scaled_family(a, pou.chi, side, (FamilyKind.CHI_A, FamilyKind.A_CHI), pou.chi,
                          tuple(pou.support(alpha) for alpha in range(pou.p)), "chi")


def decompose_R(a: SparseOperator, restrictions: RestrictionFamily, side: Side = Side.LEFT) -> OperatorFamily:
    """A_α = R_α A (LEFT) or A R_α (RIGHT) for a restriction family on H"""
    if restrictions.space != "H":
        raise DecompositionError(f"R_A needs restrictions on H, got them on {restrictions.space}")
    forcing = restrictions.nodal_weights if restrictions.nodal_weights is not None else restrictions.weights
    return _scaled_family(a, restrictions.weights, side, (FamilyKind.R_A, FamilyKind.A_R), forcing,
                          restrictions.supports, "restriction")


def decompose_DRD(factored: FactorizedForm, vec_restrictions: RestrictionFamily) -> OperatorFamily:
    """
    A_α = D* R_α D

    Every summand is symmetric positive semidefinite. The product is averaged
    with its transpose so the symmetry is exact in floating point.

    Raises:
        DimensionMismatchError: When the restrictions do not live on the range of D
    """
    if vec_restrictions.size != factored.d.rows:
        raise DimensionMismatchError(
            f"Restrictions over {vec_restrictions.size} entries, D has {factored.d.rows} rows")
    dt = factored.adjoint.matrix
    summands = []
    for alpha, w in enumerate(vec_restrictions.weights):
        product = dt @ factored.d.scale_rows(w).matrix
        summands.append(SparseOperator(0.5 * (product + product.T), True, f"D*R{alpha + 1}D"))
    return OperatorFamily(factored.operator, tuple(summands), FamilyKind.D_R_D, True,
                          forcing_weights=vec_restrictions.nodal_weights, label="gradient")


def skew_split(a: SparseOperator, pou: PartitionOfUnity, b_strategy: FamilyKind = FamilyKind.CHI_A,
               factored_b: Optional[FactorizedForm] = None) -> tuple[OperatorFamily, OperatorFamily]:
    """
    Split A = B + C into its symmetric and skew-symmetric parts and decompose both

    B goes through decompose_chiA or decompose_DRD (b_strategy). C is split as
    C_α = ½(χ_α C + C χ_α), which keeps every C_α exactly skew-symmetric.

    Returns:
        (B family, C family); Σ B_α + Σ C_α = A
    """
    if a.rows != a.cols:
        raise DimensionMismatchError("Skew splitting needs a square operator")
    b_strategy = FamilyKind(b_strategy)
    b = SparseOperator(0.5 * (a.matrix + a.matrix.T), True, "B")
    c = SparseOperator(0.5 * (a.matrix - a.matrix.T), False, "C")

    if b_strategy == FamilyKind.CHI_A:
        b_family = decompose_chiA(b, pou, Side.LEFT)
    elif b_strategy == FamilyKind.D_R_D:
        if factored_b is None:
            raise DecompositionError("D_R_D splitting of B needs a factorized form of B")
        if reconstruction_error(b, (factored_b.operator,)) > RECONSTRUCTION_TOL:
            raise DecompositionError("The factorized form does not factor the symmetric part of A")
        b_family = decompose_DRD(factored_b, edge_restrictions(factored_b, pou))
    else:
        raise DecompositionError(f"Symmetric part cannot be split by {b_strategy.value}")

    parts = tuple(SparseOperator(0.5 * (c.scale_rows(w).matrix + c.scale_cols(w).matrix), False, f"C{i + 1}")
                  for i, w in enumerate(pou.chi))
    c_family = OperatorFamily(c, parts, FamilyKind.SKEW_SPLIT, False, forcing_weights=pou.chi, label="skew")
    return b_family, c_family


@dataclass(frozen=True)
class FamilyCheck:
    """Outcome of the randomized summand checks"""
    reconstruction_gap: float
    symmetry_gaps: tuple
    min_quotients: tuple
    holds: bool


def verify_family(family: OperatorFamily, trials: int = 100,
                  rng: Optional[np.random.Generator] = None) -> FamilyCheck:
    """
    Randomized reconstruction, symmetry and semidefiniteness checks

    PSD is tested only for families that claim symmetric summands: every sampled
    Rayleigh quotient must stay above -1e-10·‖A_α‖_F.
    """
    rng = rng or np.random.default_rng(0)
    gap = reconstruction_error(family.base, family.summands)
    symmetry, quotients = [], []
    holds = gap <= RECONSTRUCTION_TOL
    for op in family.summands:
        if not family.selfadjoint:
            continue
        symmetry.append(op.check_symmetry(trials, rng))
        lowest = float(np.min(rayleigh_quotients(op, trials, rng)))
        quotients.append(lowest)
        holds = holds and symmetry[-1] <= RECONSTRUCTION_TOL and lowest >= -PSD_TOL * op.frobenius_norm()
    if not holds:
        logger.warning(f"⚠️ {family.kind.value} family failed verification (gap {gap:.2e})")
    return FamilyCheck(gap, tuple(symmetry), tuple(quotients), holds)
