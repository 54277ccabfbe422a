"""
Restrictions G_α: H -> H_α onto component spaces.

H_α is spanned by the support nodes of χ_α; G_α u = χ_α^{1/2} u on those nodes,
so Σ_α G_α* G_α = I.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tools.errors import DecompositionError
from tools.decomposition.partition import UNITY_TOL, PartitionOfUnity
from tools.linalg.sparse_operator import GridFunction, SparseOperator, apply


@dataclass(frozen=True, eq=False)
class SpaceRestrictionFamily:
    operators: tuple
    supports: tuple
    size: int

    def __post_init__(self):
        total = np.zeros(self.size)
        for g in self.operators:
            if g.cols != self.size:
                raise DecompositionError(f"G maps from {g.cols} nodes, expected {self.size}")
            total += np.asarray((g.matrix.T @ g.matrix).diagonal()).ravel()
        gap = float(np.max(np.abs(total - 1.0))) if self.size else 0.0
        if gap > UNITY_TOL:
            raise DecompositionError(f"Sum of G*G differs from I by {gap:.3e}")

    @property
    def p(self) -> int:
        return len(self.operators)

    def dims(self) -> list[int]:
        return [g.rows for g in self.operators]

    def restrict(self, alpha: int, u: GridFunction) -> GridFunction:
        return apply(self.operators[alpha], u)

    def prolong(self, alpha: int, y: GridFunction) -> GridFunction:
        return np.asarray(self.operators[alpha].matrix.T @ np.asarray(y, dtype=np.float64))

    def restrict_all(self, u: GridFunction) -> list[GridFunction]:
        return [self.restrict(alpha, u) for alpha in range(self.p)]

    def compose(self, components: Sequence[GridFunction]) -> GridFunction:
        """Σ_α G_α* y_α in index order"""
        total = np.zeros(self.size)
        for alpha, y in enumerate(components):
            total += self.prolong(alpha, y)
        return total

    def local_operator(self, a: SparseOperator, alpha: int) -> SparseOperator:
        """G_α A G_α*, symmetric when A is"""
        g = self.operators[alpha].matrix
        return SparseOperator(g @ a.matrix @ g.T, a.symmetric, f"G{alpha + 1}AG{alpha + 1}*")


def build_space_restrictions(pou: PartitionOfUnity) -> SpaceRestrictionFamily:
    operators, supports = [], []
    for alpha in range(pou.p):
        support = pou.support(alpha)
        root = np.sqrt(pou.chi[alpha, support])
        g = SparseOperator.from_triplets(np.arange(support.size), support, root,
                                         (support.size, pou.size), name=f"G{alpha + 1}")
        operators.append(g)
        supports.append(support)
    return SpaceRestrictionFamily(tuple(operators), tuple(supports), pou.size)
