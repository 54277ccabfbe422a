#!/usr/bin/env python3
"""
Test suite for the second-order regularized scheme and the system splittings
"""
import logging
import unittest

import numpy as np

from tools.errors import DecompositionError, DimensionMismatchError
from tools.analysis import DenseReference, estimate_order, run_scheme
from tools.decomposition import (PartitionProfile, Side, build_strip_partition, decompose_chiA, skew_split,
                                 split_directional, trivial_family)
from tools.linalg import NormKind, NormTag, SparseOperator, apply
from tools.parabolic import Coefficient, Grid2D, assemble_A, eigenvalue, eigenvector
from tools.schemes import (ModelProblem, SchemeConfig, SchemeKind, SplitVariant, SystemState, build_stepper,
                           energy_weight, second_order_start, system_split_step, weighted_step)

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


class TestSecondOrderScheme(unittest.TestCase):
    """(y^{n+1} - 2y^n + y^{n-1})/τ² + Σ (I + στ²A_α)⁻¹ A_α y^n = f^n"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = Grid2D.unit_square(6)
        self.k = Coefficient.constant(1.0)
        self.problem = ModelProblem.assemble(self.grid, self.k)
        self.a = self.problem.operator

    def test_taylor_start(self):
        """y^1 = u^0 + τv^0 - (τ²/2)(Au^0 - f(0))"""
        rng = np.random.default_rng(21)
        u0, v0, f0 = (rng.standard_normal(self.grid.size) for _ in range(3))
        tau = 0.01
        expected = u0 + tau * v0 - 0.5 * tau ** 2 * (apply(self.a, u0) - f0)
        np.testing.assert_allclose(second_order_start(self.a, u0, v0, f0, tau), expected, atol=1e-14)
        np.testing.assert_allclose(second_order_start(self.a, u0, None, None, tau),
                                   u0 - 0.5 * tau ** 2 * apply(self.a, u0), atol=1e-14)

    def test_scalar_recurrence(self):
        """On an eigenvector the scheme is c_{n+1} = (2 - τ²m) c_n - c_{n-1} with m = λ/(1 + στ²λ)"""
        mode = (2, 1)
        v = eigenvector(self.grid, mode)
        lam = eigenvalue(self.grid, mode)
        sigma, tau, steps = 0.25, 0.05, 20
        m = lam / (1.0 + sigma * tau ** 2 * lam)
        coefficients = [1.0, 1.0 - 0.5 * tau ** 2 * lam]
        for _ in range(steps - 1):
            coefficients.append((2.0 - tau ** 2 * m) * coefficients[-1] - coefficients[-2])

        cfg = SchemeConfig(kind=SchemeKind.SECOND_ORDER_REGULARIZED, sigma=sigma, tau=tau, steps=steps)
        stepper = build_stepper(self.problem, trivial_family(self.a), cfg, v, v0=np.zeros(self.grid.size))
        for _ in range(steps):
            stepper.step()
        np.testing.assert_allclose(stepper.solution(), coefficients[steps] * v, atol=1e-9)

    def test_energy_conserved_for_symmetric_summands(self):
        """The discrete energy is constant at σ = p/4"""
        family = split_directional(self.grid, self.k)
        u0 = np.random.default_rng(22).standard_normal(self.grid.size)
        cfg = SchemeConfig(kind=SchemeKind.SECOND_ORDER_REGULARIZED, sigma=0.5, tau=0.1, steps=30)
        records = run_scheme(build_stepper(self.problem, family, cfg, u0), cfg.steps)
        self.assertTrue(np.isnan(records[0].norm_cert))
        energies = [r.norm_cert for r in records[1:]]
        self.assertGreaterEqual(min(energies), 0.0)
        np.testing.assert_allclose(energies, energies[0], rtol=1e-8)

    def test_energy_bounded_single_summand_at_threshold(self):
        """p = 1 with σ = 1/4 keeps the energy nonnegative and constant over 500 steps"""
        u0 = np.random.default_rng(24).standard_normal(self.grid.size)
        cfg = SchemeConfig(kind=SchemeKind.SECOND_ORDER_REGULARIZED, sigma=0.25, tau=0.05, steps=500)
        records = run_scheme(build_stepper(self.problem, trivial_family(self.a), cfg, u0), cfg.steps)
        self.assertEqual(len(records), 501)
        energies = [r.norm_cert for r in records[1:]]
        self.assertGreaterEqual(min(energies), 0.0)
        np.testing.assert_allclose(energies, energies[0], rtol=1e-8)

    def test_energy_conserved_for_row_scaled_summands(self):
        """χ_α A summands conserve the energy measured in the A inner product"""
        family = decompose_chiA(self.a, build_strip_partition(self.grid, 2, 2, PartitionProfile.LINEAR))
        u0 = np.random.default_rng(23).standard_normal(self.grid.size)
        cfg = SchemeConfig(kind=SchemeKind.SECOND_ORDER_REGULARIZED, sigma=0.5, tau=0.05, steps=20)
        records = run_scheme(build_stepper(self.problem, family, cfg, u0), cfg.steps)
        energies = [r.norm_cert for r in records[1:]]
        np.testing.assert_allclose(energies, energies[0], rtol=1e-8)

    def test_energy_weights(self):
        """I for symmetric summands, A for χA, A⁻¹ for Aχ"""
        pou = build_strip_partition(self.grid, 2, 2, PartitionProfile.LINEAR)
        self.assertEqual(energy_weight(split_directional(self.grid, self.k)).tag, NormTag.IDENTITY)
        self.assertEqual(energy_weight(decompose_chiA(self.a, pou, Side.LEFT)).tag, NormTag.A)
        self.assertEqual(energy_weight(decompose_chiA(self.a, pou, Side.RIGHT)).tag, NormTag.A_INVERSE)
        skew = np.zeros((self.grid.size, self.grid.size))
        skew[0, 1], skew[1, 0] = 1.0, -1.0
        _, c_family = skew_split(SparseOperator.from_dense(self.a.to_dense() + skew), pou)
        with self.assertRaises(DecompositionError):
            energy_weight(c_family)


class TestSystemSplitting(unittest.TestCase):
    """Row and column splitting of [[A, cI], [cI, sA]]"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = Grid2D.unit_square(6)
        self.a = assemble_A(self.grid, Coefficient.constant(1.0))
        self.n = self.a.rows
        rng = np.random.default_rng(24)
        self.u1, self.u2 = rng.standard_normal(self.n), rng.standard_normal(self.n)

    def _system(self, coupling: float, scale: float = 2.0) -> SystemState:
        off = SparseOperator.identity(self.n).scaled(coupling)
        return SystemState(self.u1, self.u2, self.a, off, off, self.a.scaled(scale))

    def test_decoupled_blocks_are_weighted_steps(self):
        """Without coupling each block takes its own weighted step"""
        system = self._system(0.0)
        for variant in (SplitVariant.ROW, SplitVariant.COLUMN):
            for sigma in (0.5, 1.0):
                cfg = SchemeConfig(kind=SchemeKind.SYSTEM_ROW_SPLIT, sigma=sigma, tau=0.02)
                stepped = system_split_step(system, variant, cfg)
                np.testing.assert_allclose(stepped.u1, weighted_step(self.a, self.u1, None, None, cfg), atol=1e-13)
                np.testing.assert_allclose(stepped.u2, weighted_step(system.a22, self.u2, None, None, cfg),
                                           atol=1e-13)

    def test_block_shapes_checked(self):
        """Blocks that do not fit together are refused"""
        with self.assertRaises(DimensionMismatchError):
            SystemState(self.u1, self.u2, self.a, SparseOperator.identity(self.n - 1), self.a, self.a)

    def test_stacked_operator(self):
        """The block operator is symmetric for symmetric coupling"""
        system = self._system(3.0)
        op = system.operator()
        self.assertTrue(op.symmetric)
        np.testing.assert_allclose(apply(op, system.stacked()),
                                   np.concatenate([apply(self.a, self.u1) + 3.0 * self.u2,
                                                   3.0 * self.u1 + 2.0 * apply(self.a, self.u2)]))

    def test_coupled_splitting_converges(self):
        """Both variants at σ = 1 observe slope 1 against the dense block solution"""
        system = self._system(5.0)
        op = system.operator()
        v = eigenvector(self.grid, (1, 1))
        u0 = np.concatenate([v, v])
        problem = ModelProblem(op)
        t_final = 0.1
        reference = DenseReference(op.to_dense(), u0)(t_final)
        for kind in (SchemeKind.SYSTEM_ROW_SPLIT, SchemeKind.SYSTEM_COLUMN_SPLIT):
            def run(tau: float) -> np.ndarray:
                steps = int(round(t_final / tau))
                cfg = SchemeConfig(kind=kind, sigma=1.0, tau=tau, steps=steps)
                stepper = build_stepper(problem, system, cfg, u0)
                run_scheme(stepper, steps, instrument=False)
                return stepper.solution()

            estimate = estimate_order(run, 0.005, 4, reference, NormKind.identity())
            self.assertGreaterEqual(estimate.slope, 0.8, kind.value)
            self.assertLessEqual(estimate.slope, 1.2, kind.value)


def main():
    """Run the test suite"""
    unittest.main(verbosity=2)


if __name__ == "__main__":
    main()
