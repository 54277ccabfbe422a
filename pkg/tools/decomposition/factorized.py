"""
Gradient factor D with D*D = A and the restriction families living on its range.

The range space is indexed by grid edges. The x1 block holds one row per
horizontal edge, N1 per grid row, including the two edges touching the
boundary; the x2 block holds one row per vertical edge. With zero Dirichlet
data this makes D*D reproduce the five-point operator exactly.
"""

import logging
from dataclasses import dataclass

import numpy as np

from tools.errors import DecompositionError
from tools.decomposition.partition import PartitionOfUnity, RestrictionFamily
from tools.linalg.sparse_operator import SparseOperator, apply
from tools.parabolic.assembly import sample_coefficient
from tools.parabolic.coefficient import Coefficient
from tools.parabolic.grid import Grid2D

logger = logging.getLogger(__name__)

FACTOR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FactorizedForm:
    """
    D: H -> 𝐇 together with the operator it factorizes.

    edge_nodes[e] holds the node indices at both ends of edge e, -1 where the
    end lies on the boundary.
    """
    d: SparseOperator
    operator: SparseOperator
    edge_nodes: np.ndarray
    block_sizes: tuple[int, int]

    def __post_init__(self):
        if self.d.cols != self.operator.rows or self.edge_nodes.shape != (self.d.rows, 2):
            raise DecompositionError("Factor, operator and edge table do not match")
        gap = factorization_error(self, samples=50)
        if gap > FACTOR_TOL:
            raise DecompositionError(f"D*D differs from A by {gap:.3e} relative")

    @property
    def adjoint(self) -> SparseOperator:
        return self.d.transpose()


def factorization_error(factored: FactorizedForm, samples: int = 50, seed: int = 0) -> float:
    """Worst |(Du, Dv) - (Au, v)| / (‖A‖_F ‖u‖ ‖v‖) over random pairs"""
    rng = np.random.default_rng(seed)
    scale = max(factored.operator.frobenius_norm(), np.finfo(float).tiny)
    worst = 0.0
    for _ in range(samples):
        u = rng.standard_normal(factored.d.cols)
        v = rng.standard_normal(factored.d.cols)
        gap = abs(np.dot(apply(factored.d, u), apply(factored.d, v)) - np.dot(apply(factored.operator, u), v))
        worst = max(worst, gap / (scale * np.linalg.norm(u) * np.linalg.norm(v)))
    return worst


def build_gradient_factor(grid: Grid2D, k: Coefficient, operator: SparseOperator) -> FactorizedForm:
    """
    Scaled forward differences D1 u = k^{1/2}(x1 + h1/2, x2)(u(x + h1) - u(x))/h1 and
    likewise D2, stacked as [D1; D2]
    """
    n1, n2 = grid.interior1, grid.interior2
    rows, cols, vals, ends = [], [], [], []

    # x1 edges: edge j joins columns j and j+1 on grid row i2
    j, i2 = np.meshgrid(np.arange(grid.n1), np.arange(1, grid.n2), indexing="xy")
    j, i2 = j.ravel(), i2.ravel()
    scale = np.sqrt(sample_coefficient(k, (j + 0.5) * grid.h1, i2 * grid.h2)) * (grid.n1 / grid.l1)
    edge = np.arange(j.size)
    left = np.where(j >= 1, (i2 - 1) * n1 + (j - 1), -1)
    right = np.where(j + 1 <= n1, (i2 - 1) * n1 + j, -1)
    ends.append(np.column_stack([left, right]))
    rows += [edge[right >= 0], edge[left >= 0]]
    cols += [right[right >= 0], left[left >= 0]]
    vals += [scale[right >= 0], -scale[left >= 0]]
    offset = j.size

    # x2 edges: edge j joins rows j and j+1 on grid column i1
    i1, j = np.meshgrid(np.arange(1, grid.n1), np.arange(grid.n2), indexing="xy")
    i1, j = i1.ravel(), j.ravel()
    scale = np.sqrt(sample_coefficient(k, i1 * grid.h1, (j + 0.5) * grid.h2)) * (grid.n2 / grid.l2)
    edge = offset + np.arange(j.size)
    below = np.where(j >= 1, (j - 1) * n1 + (i1 - 1), -1)
    above = np.where(j + 1 <= n2, j * n1 + (i1 - 1), -1)
    ends.append(np.column_stack([below, above]))
    rows += [edge[above >= 0], edge[below >= 0]]
    cols += [above[above >= 0], below[below >= 0]]
    vals += [scale[above >= 0], -scale[below >= 0]]

    total = offset + j.size
    d = SparseOperator.from_triplets(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
                                     (total, grid.size), name="D")
    logger.debug(f"Gradient factor: {offset} x1 edges, {j.size} x2 edges")
    return FactorizedForm(d, operator, np.vstack(ends), (offset, j.size))


def direction_restrictions(factored: FactorizedForm) -> RestrictionFamily:
    """block-diag(I, 0) and block-diag(0, I): the directional split"""
    m1, m2 = factored.block_sizes
    r1 = np.concatenate([np.ones(m1), np.zeros(m2)])
    return RestrictionFamily(np.vstack([r1, 1.0 - r1]), space="edges")


def edge_restrictions(factored: FactorizedForm, pou: PartitionOfUnity) -> RestrictionFamily:
    """Nodal partition carried to edges: mean of χ over the interior ends"""
    if pou.size != factored.d.cols:
        raise DecompositionError(f"Partition over {pou.size} nodes, factor over {factored.d.cols}")
    ends = factored.edge_nodes
    inside = (ends >= 0).astype(np.float64)
    safe = np.where(ends >= 0, ends, 0)
    weights = (pou.chi[:, safe] * inside).sum(axis=2) / inside.sum(axis=1)
    return RestrictionFamily(weights, nodal_weights=pou.chi, space="edges")
