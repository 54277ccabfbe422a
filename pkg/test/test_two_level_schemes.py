#!/usr/bin/env python3
"""
Test suite for the two-level schemes
Weighted and factorized steps, the a-priori estimate and observed orders
"""
import logging
import unittest

import numpy as np

from tools.errors import DecompositionError, DivergenceError
from tools.analysis import apriori_check_thm1, estimate_order, run_scheme
from tools.decomposition import build_strip_partition, decompose_chiA, split_directional
from tools.linalg import NormKind, SparseOperator, apply, weighted_norm
from tools.parabolic import (Coefficient, Grid2D, assemble_A, directional_eigenvalues, eigenmode_reference,
                             eigenvector)
from tools.schemes import (ModelProblem, SchemeConfig, SchemeKind, build_stepper, factorized_norm, factorized_step,
                           forcing_at_sigma, stability_threshold, weighted_step)

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def weighted_config(sigma: float, tau: float, steps: int = 0) -> SchemeConfig:
    return SchemeConfig(kind=SchemeKind.WEIGHTED, sigma=sigma, tau=tau, steps=steps)


def forced_trajectory(a, grid: Grid2D, u0: np.ndarray, cfg: SchemeConfig, scale: float = 1.0) -> tuple[list, list]:
    """Weighted levels y^1..y^N and f^{n+σ} for f(t, x) = scale·(1 + sin 2πt)·sin(πx1)·x2"""
    x1, x2 = grid.node_coordinates()
    profile = scale * np.sin(np.pi * x1) * x2

    def forcing(t: float) -> np.ndarray:
        return (1.0 + np.sin(2.0 * np.pi * t)) * profile

    y, trajectory, history = u0, [], []
    for n in range(cfg.steps):
        f_n, f_np1 = forcing(n * cfg.tau), forcing((n + 1) * cfg.tau)
        y = weighted_step(a, y, f_n, f_np1, cfg)
        trajectory.append(y)
        history.append(forcing_at_sigma(f_n, f_np1, cfg.sigma))
    return trajectory, history


class TestWeightedStep(unittest.TestCase):
    """One step of (I + στA) y^{n+1} = (I - (1-σ)τA) y^n + τ f^{n+σ}"""

    def setUp(self):
        """Set up test fixtures"""
        self.a = assemble_A(Grid2D.unit_square(3), Coefficient.constant(1.0))
        self.ones = np.ones(4)

    def test_crank_nicolson_factor(self):
        """σ = 1/2, τ = 0.01 on the λ = 18 mode multiplies by 0.91/1.09"""
        y = weighted_step(self.a, self.ones, None, None, weighted_config(0.5, 0.01))
        np.testing.assert_allclose(y, (0.91 / 1.09) * self.ones, rtol=1e-10)

    def test_zero_stays_zero(self):
        """Zero data and zero forcing give zero"""
        y = weighted_step(self.a, np.zeros(4), None, None, weighted_config(0.5, 0.01))
        np.testing.assert_array_equal(y, np.zeros(4))

    def test_explicit(self):
        """σ = 0 is y - τAy without a solve"""
        u = np.array([1.0, -2.0, 0.5, 3.0])
        y = weighted_step(self.a, u, None, None, weighted_config(0.0, 0.01))
        np.testing.assert_allclose(y, u - 0.01 * apply(self.a, u), rtol=0, atol=1e-15)

    def test_steady_state_is_fixed(self):
        """With f = Aw the state w does not move"""
        w = np.array([0.3, -1.0, 2.0, 0.7])
        f = apply(self.a, w)
        y = weighted_step(self.a, w, f, f, weighted_config(0.75, 0.1))
        np.testing.assert_allclose(y, w, atol=1e-10)

    def test_inputs_untouched(self):
        """The step returns a new array"""
        u = self.ones.copy()
        weighted_step(self.a, u, None, None, weighted_config(1.0, 0.05))
        np.testing.assert_array_equal(u, self.ones)


class TestStability(unittest.TestCase):
    """Unconditional stability above σ = 1/2 and its failure below"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = Grid2D.unit_square(3)
        self.problem = ModelProblem.assemble(self.grid, Coefficient.constant(1.0))
        self.u0 = np.random.default_rng(11).standard_normal(self.grid.size)

    def test_explicit_diverges_beyond_step_limit(self):
        """σ = 0 with τ = 4/54 amplifies the top mode by 3 per step"""
        cfg = weighted_config(0.0, 4.0 / 54.0, 60)
        stepper = build_stepper(self.problem, None, cfg, self.u0)
        with self.assertRaises(DivergenceError) as ctx:
            run_scheme(stepper, cfg.steps)
        self.assertLess(ctx.exception.step, 60)
        self.assertEqual(len(ctx.exception.records), ctx.exception.step)

    def test_implicit_energy_nonincreasing(self):
        """σ = 1/2 with a large step never grows ‖y‖_A"""
        cfg = weighted_config(0.5, 1.0, 20)
        records = run_scheme(build_stepper(self.problem, None, cfg, self.u0), cfg.steps)
        norms = [r.norm_A for r in records]
        for before, after in zip(norms, norms[1:]):
            self.assertLessEqual(after, before * (1 + 1e-12))

    def test_apriori_estimate_holds(self):
        """With forcing the estimate holds at every level for σ >= 1/2"""
        cfg = weighted_config(0.5, 0.05, 20)
        f = np.random.default_rng(5).standard_normal(self.grid.size)
        y, trajectory = self.u0, []
        for _ in range(cfg.steps):
            y = weighted_step(self.problem.operator, y, f, f, cfg)
            trajectory.append(y)
        check = apriori_check_thm1(trajectory, self.u0, [f] * cfg.steps, NormKind.energy(self.problem.operator),
                                   self.problem.operator, cfg.tau)
        self.assertTrue(check.holds)

    def test_apriori_estimate_every_norm(self):
        """The estimate holds for D in {I, A, A⁻¹} and σ in {1/2, 3/4, 1} over 500 forced steps"""
        a = self.problem.operator
        for d in (NormKind.identity(), NormKind.energy(a), NormKind.inverse(a)):
            for sigma in (0.5, 0.75, 1.0):
                cfg = weighted_config(sigma, 0.01, 500)
                trajectory, history = forced_trajectory(a, self.grid, self.u0, cfg)
                check = apriori_check_thm1(trajectory, self.u0, history, d, a, cfg.tau)
                self.assertTrue(check.holds, f"D={d.tag} σ={sigma} margin={check.margin}")

    def test_apriori_margin_scales_quadratically(self):
        """Scaling u^0 and f by c scales both sides, and so the margin, by c²"""
        a = self.problem.operator
        d = NormKind.energy(a)
        cfg = weighted_config(0.75, 0.01, 100)
        trajectory, history = forced_trajectory(a, self.grid, self.u0, cfg)
        base = apriori_check_thm1(trajectory, self.u0, history, d, a, cfg.tau)
        self.assertGreater(base.margin, 0.0)
        for c in (2.0, 3.0):
            trajectory, history = forced_trajectory(a, self.grid, c * self.u0, cfg, scale=c)
            scaled = apriori_check_thm1(trajectory, c * self.u0, history, d, a, cfg.tau)
            self.assertTrue(scaled.holds)
            self.assertAlmostEqual(scaled.margin, c * c * base.margin, delta=1e-9 * c * c * base.margin)

    def test_apriori_estimate_fails_when_unstable(self):
        """The explicit scheme beyond its step limit violates the estimate"""
        cfg = weighted_config(0.0, 4.0 / 54.0, 10)
        y, trajectory = self.u0, []
        for _ in range(cfg.steps):
            y = weighted_step(self.problem.operator, y, None, None, cfg)
            trajectory.append(y)
        check = apriori_check_thm1(trajectory, self.u0, None, NormKind.energy(self.problem.operator),
                                   self.problem.operator, cfg.tau)
        self.assertFalse(check.holds)
        self.assertLess(check.margin, 0.0)

    def test_thresholds(self):
        """σ thresholds per scheme family"""
        self.assertEqual(stability_threshold(SchemeKind.WEIGHTED, 4), 0.5)
        self.assertEqual(stability_threshold(SchemeKind.REGULARIZED, 3), 1.5)
        self.assertEqual(stability_threshold(SchemeKind.COMPONENT_SPACE_3LEVEL, 2), 0.5)
        self.assertEqual(stability_threshold(SchemeKind.SECOND_ORDER_REGULARIZED, 4), 1.0)
        with self.assertRaises(ValueError):
            stability_threshold(SchemeKind.WEIGHTED, 0)


class TestFactorizedScheme(unittest.TestCase):
    """(I + στA1)(I + στA2)(y^{n+1} - y^n)/τ + A y^n = f^{n+σ}"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = Grid2D(1.0, 1.0, 8, 6)
        self.k = Coefficient.constant(1.0)
        self.family = split_directional(self.grid, self.k)
        self.problem = ModelProblem(self.family.base, self.grid, self.k)
        self.u0 = np.random.default_rng(7).standard_normal(self.grid.size)

    def test_certified_norm_nonincreasing(self):
        """‖(I + στA2) y‖ does not grow for σ = 1/2"""
        cfg = SchemeConfig(kind=SchemeKind.FACTORIZED, sigma=0.5, tau=0.05, steps=25)
        stepper = build_stepper(self.problem, self.family, cfg, self.u0)
        records = run_scheme(stepper, cfg.steps)
        norms = [r.norm_cert for r in records]
        self.assertAlmostEqual(norms[0], factorized_norm(self.family[1], self.u0, 0.5, 0.05), places=12)
        for before, after in zip(norms, norms[1:]):
            self.assertLessEqual(after, before * (1 + 1e-12))

    def test_long_run_nonincreasing_at_sigma_one(self):
        """σ = 1 keeps ‖(I + στA2) y‖ from growing over 500 steps"""
        cfg = SchemeConfig(kind=SchemeKind.FACTORIZED, sigma=1.0, tau=0.05, steps=500)
        records = run_scheme(build_stepper(self.problem, self.family, cfg, self.u0), cfg.steps)
        norms = [r.norm_cert for r in records]
        self.assertEqual(len(norms), 501)
        for before, after in zip(norms, norms[1:]):
            self.assertLessEqual(after, before + 1e-12 * norms[0])

    def test_eigenmode_amplification(self):
        """On an eigenvector one step multiplies by 1 - τ(λ1 + λ2)/((1 + στλ1)(1 + στλ2))"""
        for sigma, tau in ((0.5, 0.03), (1.0, 0.2)):
            cfg = SchemeConfig(kind=SchemeKind.FACTORIZED, sigma=sigma, tau=tau)
            for mode in ((1, 1), (3, 2), (7, 5)):
                v = eigenvector(self.grid, mode)
                lam1, lam2 = directional_eigenvalues(self.grid, mode)
                g = 1.0 - tau * (lam1 + lam2) / ((1.0 + sigma * tau * lam1) * (1.0 + sigma * tau * lam2))
                y = factorized_step(self.family[0], self.family[1], v, None, None, cfg)
                np.testing.assert_allclose(y, g * v, atol=1e-10 * np.linalg.norm(v))

    def test_zero_second_factor_is_weighted(self):
        """A2 = 0 reduces the step to the weighted scheme on A1"""
        a1 = self.family[0]
        zero = SparseOperator.zeros(self.grid.size)
        f = np.linspace(0.0, 1.0, self.grid.size)
        for sigma in (0.5, 1.0):
            cfg = SchemeConfig(kind=SchemeKind.FACTORIZED, sigma=sigma, tau=0.05)
            expected = weighted_step(a1, self.u0, f, f, cfg)
            np.testing.assert_allclose(factorized_step(a1, zero, self.u0, f, f, cfg), expected, atol=1e-10)

    def test_steady_state_is_fixed(self):
        """With f = Aw the state w does not move"""
        w = np.linspace(-1.0, 1.0, self.grid.size)
        f = apply(self.family.base, w)
        cfg = SchemeConfig(kind=SchemeKind.FACTORIZED, sigma=1.0, tau=0.2)
        y = factorized_step(self.family[0], self.family[1], w, f, f, cfg)
        np.testing.assert_allclose(y, w, atol=1e-10)

    def test_single_pair_required(self):
        """Three summands are refused"""
        family = decompose_chiA(self.family.base, build_strip_partition(self.grid, 3))
        cfg = SchemeConfig(kind=SchemeKind.FACTORIZED, sigma=0.5, tau=0.05)
        with self.assertRaises(DecompositionError):
            build_stepper(self.problem, family, cfg, self.u0)


class TestObservedOrder(unittest.TestCase):
    """τ-halving against the exact eigenmode solution"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = Grid2D.unit_square(9)
        self.problem = ModelProblem.assemble(self.grid, Coefficient.constant(1.0))
        self.u0 = eigenvector(self.grid, (1, 1))
        self.t_final = 0.32

    def _runner(self, sigma: float):
        def run(tau: float) -> np.ndarray:
            steps = int(round(self.t_final / tau))
            cfg = weighted_config(sigma, tau, steps)
            stepper = build_stepper(self.problem, None, cfg, self.u0)
            run_scheme(stepper, steps, instrument=False)
            return stepper.solution()
        return run

    def test_crank_nicolson_is_second_order(self):
        """σ = 1/2 observes slope 2"""
        reference = eigenmode_reference(self.grid, (1, 1), self.t_final)
        estimate = estimate_order(self._runner(0.5), 0.02, 4, reference, NormKind.energy(self.problem.operator))
        self.assertFalse(estimate.saturated)
        self.assertGreaterEqual(estimate.slope, 1.9)
        self.assertLessEqual(estimate.slope, 2.1)

    def test_backward_euler_is_first_order(self):
        """σ = 1 observes slope 1"""
        reference = eigenmode_reference(self.grid, (1, 1), self.t_final)
        estimate = estimate_order(self._runner(1.0), 0.005, 4, reference, NormKind.energy(self.problem.operator),
                                  max_workers=2)
        self.assertGreaterEqual(estimate.slope, 0.9)
        self.assertLessEqual(estimate.slope, 1.1)
        self.assertEqual(len(estimate.ratios), 3)

    def test_factorized_crank_nicolson_is_second_order(self):
        """The factorized scheme with σ = 1/2 observes slope 2 on the 16x16 grid"""
        grid = Grid2D.unit_square(17)
        k = Coefficient.constant(1.0)
        family = split_directional(grid, k)
        problem = ModelProblem(family.base, grid, k)
        u0 = eigenvector(grid, (1, 1))

        def run(tau: float) -> np.ndarray:
            steps = int(round(self.t_final / tau))
            cfg = SchemeConfig(kind=SchemeKind.FACTORIZED, sigma=0.5, tau=tau, steps=steps)
            stepper = build_stepper(problem, family, cfg, u0)
            run_scheme(stepper, steps, instrument=False)
            return stepper.solution()

        reference = eigenmode_reference(grid, (1, 1), self.t_final)
        estimate = estimate_order(run, 0.02, 4, reference, NormKind.energy(family.base))
        self.assertFalse(estimate.saturated)
        self.assertGreaterEqual(estimate.slope, 1.9)
        self.assertLessEqual(estimate.slope, 2.1)

    def test_energy_error_matches_identity_error_scale(self):
        """For a single mode ‖e‖_A = √λ ‖e‖"""
        reference = eigenmode_reference(self.grid, (1, 1), self.t_final)
        y = self._runner(0.5)(0.04)
        gap = y - reference
        lam = float(apply(self.problem.operator, self.u0)[0] / self.u0[0])
        self.assertAlmostEqual(weighted_norm(gap, NormKind.energy(self.problem.operator)),
                               np.sqrt(lam) * np.linalg.norm(gap), delta=1e-9)


def main():
    """Run the test suite"""
    unittest.main(verbosity=2)


if __name__ == "__main__":
    main()
