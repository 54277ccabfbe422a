#!/usr/bin/env python3
"""
Test suite for the analysis layer
Dense references, the run monitor, the a-priori check and order estimation
"""
import logging
import math
import unittest

import numpy as np

from tools.errors import DimensionMismatchError, DivergenceError
from tools.analysis import (CSV_COLUMNS, DenseReference, RunRecord, apriori_check_thm1, certified_norm_margin,
                            dense_wave_reference, estimate_order, run_scheme)
from tools.analysis.reference import DENSE_LIMIT
from tools.linalg import NormKind
from tools.parabolic import Coefficient, Grid2D, assemble_A, eigenmode_reference, eigenvalue, eigenvector
from tools.schemes import ModelProblem, SchemeConfig, SchemeKind, build_stepper

# Set up logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def record(n: int, norm_cert: float) -> RunRecord:
    nan = float("nan")
    return RunRecord(n, 0.1 * n, nan, nan, norm_cert, nan, nan)


class TestDenseReference(unittest.TestCase):
    """e^{-tA} u^0 by diagonalization"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = Grid2D.unit_square(5)
        self.a = assemble_A(self.grid, Coefficient.constant(1.0)).to_dense()

    def test_initial_time_returns_data(self):
        """t = 0 gives back a copy of u^0"""
        u0 = np.random.default_rng(31).standard_normal(self.grid.size)
        reference = DenseReference(self.a, u0)
        y = reference(0.0)
        np.testing.assert_array_equal(y, u0)
        y[0] = 99.0
        self.assertNotEqual(reference(0.0)[0], 99.0)

    def test_matches_eigenmode_solution(self):
        """On an eigenvector the dense oracle agrees with e^{-λt} v"""
        mode = (2, 1)
        reference = DenseReference(self.a, eigenvector(self.grid, mode))
        for t in (0.01, 0.05, 0.2):
            np.testing.assert_allclose(reference(t), eigenmode_reference(self.grid, mode, t), atol=1e-12)

    def test_wave_solution(self):
        """With wave set the oracle is cos(t√λ) v"""
        mode = (1, 2)
        v = eigenvector(self.grid, mode)
        t = 0.3
        expected = math.cos(t * math.sqrt(eigenvalue(self.grid, mode))) * v
        np.testing.assert_allclose(dense_wave_reference(self.a, v, t), expected, atol=1e-12)

    def test_size_cap(self):
        """Matrices above the unknown cap are refused"""
        n = DENSE_LIMIT + 1
        with self.assertRaises(DimensionMismatchError):
            DenseReference(np.eye(n), np.zeros(n))

    def test_nonsymmetric_refused(self):
        """The oracle needs a symmetric matrix"""
        m = np.array([[2.0, 1.0], [0.0, 2.0]])
        with self.assertRaises(ValueError):
            DenseReference(m, np.ones(2))

    def test_data_shape_checked(self):
        """u^0 must match the operator"""
        with self.assertRaises(DimensionMismatchError):
            DenseReference(self.a, np.ones(3))


class TestRunScheme(unittest.TestCase):
    """Records, timing and the divergence sentinel"""

    def setUp(self):
        """Set up test fixtures"""
        self.grid = Grid2D.unit_square(4)
        self.problem = ModelProblem.assemble(self.grid, Coefficient.constant(1.0))
        self.u0 = eigenvector(self.grid, (1, 1))

    def _stepper(self, sigma: float, tau: float, steps: int, u0=None):
        cfg = SchemeConfig(kind=SchemeKind.WEIGHTED, sigma=sigma, tau=tau, steps=steps)
        return build_stepper(self.problem, None, cfg, self.u0 if u0 is None else u0)

    def test_one_record_per_level(self):
        """steps + 1 records with n = 0..steps and t = nτ"""
        records = run_scheme(self._stepper(0.5, 0.01, 10), 10)
        self.assertEqual(len(records), 11)
        self.assertEqual([r.n for r in records], list(range(11)))
        self.assertAlmostEqual(records[-1].t, 0.1, places=12)
        self.assertAlmostEqual(records[0].norm_I, float(np.linalg.norm(self.u0)), places=12)

    def test_errors_with_reference(self):
        """Errors are zero at n = 0 and NaN without a reference"""
        reference = lambda t: eigenmode_reference(self.grid, (1, 1), t)
        records = run_scheme(self._stepper(0.5, 0.01, 5), 5, reference)
        self.assertEqual(records[0].err_I, 0.0)
        self.assertTrue(all(r.err_A > 0.0 for r in records[1:]))
        plain = run_scheme(self._stepper(0.5, 0.01, 5), 5)
        self.assertTrue(all(math.isnan(r.err_I) for r in plain))

    def test_timing_off_records_zero(self):
        """step_seconds is 0.0 unless timing is requested"""
        records = run_scheme(self._stepper(1.0, 0.01, 3), 3)
        self.assertTrue(all(r.step_seconds == 0.0 for r in records))
        timed = run_scheme(self._stepper(1.0, 0.01, 3), 3, timing=True)
        self.assertTrue(all(r.step_seconds >= 0.0 for r in timed[1:]))

    def test_uninstrumented_run(self):
        """instrument=False leaves norms NaN and the trajectory unchanged"""
        instrumented = self._stepper(0.5, 0.02, 8)
        silent = self._stepper(0.5, 0.02, 8)
        run_scheme(instrumented, 8)
        records = run_scheme(silent, 8, instrument=False)
        self.assertTrue(all(math.isnan(r.norm_A) for r in records))
        np.testing.assert_array_equal(silent.solution(), instrumented.solution())

    def test_observer_sees_every_step(self):
        """The observer runs once per accepted step"""
        seen = []
        run_scheme(self._stepper(0.5, 0.02, 6), 6, observer=lambda stepper: seen.append(stepper.n))
        self.assertEqual(seen, [1, 2, 3, 4, 5, 6])

    def test_divergence_carries_records(self):
        """The sentinel fires before 1e12 growth and keeps the accepted records"""
        u0 = np.random.default_rng(32).standard_normal(self.grid.size)
        stepper = self._stepper(0.0, 0.1, 200, u0)
        with self.assertRaises(DivergenceError) as ctx:
            run_scheme(stepper, 200)
        error = ctx.exception
        self.assertLess(error.step, 200)
        self.assertEqual(len(error.records), error.step)
        self.assertEqual(error.records[-1].n, error.step - 1)
        self.assertGreater(error.energy, 1e12 * error.records[0].norm_A ** 2)

    def test_zero_data_never_diverges(self):
        """With zero initial energy the sentinel is off"""
        records = run_scheme(self._stepper(0.0, 0.1, 5, np.zeros(self.grid.size)), 5)
        self.assertEqual(len(records), 6)
        self.assertTrue(all(r.norm_A == 0.0 for r in records))


class TestAprioriCheck(unittest.TestCase):
    """‖y^{n+1}‖²_D <= ‖u^0‖²_D + ½ Σ τ‖f‖²_{DA⁻¹}"""

    def setUp(self):
        """Set up test fixtures"""
        self.a = assemble_A(Grid2D.unit_square(3), Coefficient.constant(1.0))

    def test_zero_data(self):
        """Zero everywhere holds with zero margin"""
        zeros = np.zeros(4)
        check = apriori_check_thm1([zeros, zeros], zeros, None, NormKind.identity(), self.a, 0.1)
        self.assertTrue(check.holds)
        self.assertEqual(check.margin, 0.0)

    def test_empty_trajectory(self):
        """No levels to check holds trivially"""
        check = apriori_check_thm1([], np.ones(4), None, NormKind.energy(self.a), self.a, 0.1)
        self.assertTrue(check.holds)

    def test_forcing_enlarges_bound(self):
        """A level above ‖u^0‖ is admitted once the forcing term covers it"""
        u0 = np.ones(4)
        grown = 1.1 * u0
        f = 5.0 * np.ones(4)
        identity = NormKind.identity()
        self.assertFalse(apriori_check_thm1([grown], u0, None, identity, self.a, 0.1).holds)
        # ‖f‖²_{A⁻¹} = 100/18 and half of it exceeds 0.84
        self.assertTrue(apriori_check_thm1([grown], u0, [f], identity, self.a, 1.0).holds)


class TestCertifiedMargin(unittest.TestCase):
    """Worst relative decrease of the certified norm"""

    def test_decreasing(self):
        """A decreasing sequence has a non-negative margin"""
        margin = certified_norm_margin([record(0, 4.0), record(1, 3.0), record(2, 2.5)])
        self.assertAlmostEqual(margin, 0.125)

    def test_growth_is_negative(self):
        """Growth shows up as a negative margin"""
        margin = certified_norm_margin([record(0, 2.0), record(1, 2.0), record(2, 3.0)])
        self.assertAlmostEqual(margin, -0.5)

    def test_nan_skipped(self):
        """NaN entries are ignored and short sequences give zero"""
        self.assertEqual(certified_norm_margin([record(0, float("nan")), record(1, 1.0)]), 0.0)
        self.assertEqual(certified_norm_margin([]), 0.0)

    def test_columns(self):
        """CSV columns follow the record fields"""
        self.assertEqual(CSV_COLUMNS, ("n", "t", "norm_I", "norm_A", "norm_cert", "err_I", "err_A", "step_seconds"))
        self.assertEqual(len(record(3, 1.0).as_row()), len(CSV_COLUMNS))


class TestEstimateOrder(unittest.TestCase):
    """Fitting log(error) against log(τ)"""

    def setUp(self):
        """Set up test fixtures"""
        self.reference = np.array([1.0, -2.0, 0.5])
        self.norm = NormKind.identity()

    def test_synthetic_slope(self):
        """Errors proportional to τ^1.5 give slope 1.5 and equal ratios"""
        direction = np.array([1.0, 0.0, 0.0])
        estimate = estimate_order(lambda tau: self.reference + tau ** 1.5 * direction, 0.1, 5, self.reference,
                                  self.norm)
        self.assertAlmostEqual(estimate.slope, 1.5, places=8)
        self.assertEqual(len(estimate.ratios), 4)
        for ratio in estimate.ratios:
            self.assertAlmostEqual(ratio, 1.5, places=8)
        self.assertEqual(estimate.taus, (0.1, 0.05, 0.025, 0.0125, 0.00625))

    def test_saturated(self):
        """Exact answers at every level report saturation with NaN slope"""
        estimate = estimate_order(lambda tau: self.reference.copy(), 0.1, 3, self.reference, self.norm)
        self.assertTrue(estimate.saturated)
        self.assertTrue(math.isnan(estimate.slope))

    def test_too_few_levels(self):
        """Fewer than three levels are refused"""
        with self.assertRaises(ValueError):
            estimate_order(lambda tau: self.reference, 0.1, 2, self.reference, self.norm)

    def test_divergent_level_named(self):
        """A diverging level is reported with its index and step"""
        def runner(tau: float) -> np.ndarray:
            if tau < 0.06:
                raise DivergenceError("sentinel", 7, 1e20)
            return self.reference + tau

        with self.assertRaises(DivergenceError) as ctx:
            estimate_order(runner, 0.1, 3, self.reference, self.norm)
        self.assertIn("Level 1", str(ctx.exception))
        self.assertEqual(ctx.exception.step, 7)

    def test_non_finite_level(self):
        """NaN output counts as divergence"""
        with self.assertRaises(DivergenceError):
            estimate_order(lambda tau: np.full(3, np.nan), 0.1, 3, self.reference, self.norm)

    def test_threads_do_not_change_result(self):
        """Concurrent levels give the same estimate"""
        runner = lambda tau: self.reference + np.array([tau ** 2, tau, 0.0])
        serial = estimate_order(runner, 0.2, 4, self.reference, self.norm)
        threaded = estimate_order(runner, 0.2, 4, self.reference, self.norm, max_workers=4)
        self.assertEqual(serial, threaded)


def main():
    """Run the test suite"""
    unittest.main(verbosity=2)


if __name__ == "__main__":
    main()
