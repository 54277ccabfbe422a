#!/usr/bin/env python3
"""
Experiment Service
Turns a validated ExperimentConfig into assembled operators, runs the scheme and
writes <name>.csv, <name>-splitkit-summary.json and, on request, <name>-orders.json.

Failures are reported through ExperimentResult with the CLI exit code already
decided: 2 for invalid input, 3 for divergence, 4 for solver failures, 1 otherwise.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Union

import numpy as np

from tools.errors import (CoefficientError, ConfigError, DivergenceError, PartitionError, SolverError,
                          SplitkitError)
from tools.analysis.convergence import OrderEstimate, estimate_order
from tools.analysis.monitors import AprioriCheck, apriori_check_thm1, run_scheme
from tools.analysis.records import RunRecord, certified_norm_margin
from tools.analysis.reference import DenseReference
from tools.decomposition.factorized import build_gradient_factor, direction_restrictions, edge_restrictions
from tools.decomposition.operator_family import Side, decompose_chiA, decompose_DRD, decompose_R, split_directional
from tools.decomposition.partition import build_strip_partition, restrictions_from_partition
from tools.decomposition.space_restriction import build_space_restrictions
from tools.linalg.krylov import smallest_eigenvalue_estimate
from tools.linalg.norms import NormKind
from tools.linalg.sparse_operator import GridFunction, SparseOperator
from tools.parabolic.coefficient import Coefficient, GridForcing
from tools.parabolic.grid import Grid2D
from tools.parabolic.reference import eigenmode_reference, eigenvector, wave_eigenmode_reference
from tools.schemes.config import SchemeConfig, SchemeKind, stability_threshold
from tools.schemes.steppers import BaseStepper, Decomposition, ModelProblem, build_stepper
from tools.schemes.systems import SystemState
from tools.schemes.two_level import forcing_at_sigma
from service.csv_emitter import write_json, write_table
from service.experiment_config import (SECOND_ORDER_KINDS, CheckerboardCoefficient, ConstantCoefficient,
                                       ConstantInitial, DecompositionKind, EigenmodeInitial, ExperimentConfig,
                                       ExpressionCoefficient, OrdersSpec, RandomInitial, ReferenceKind,
                                       VectorRestriction, load_config)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_SOLVER = 4

Reference = Callable[[float], GridFunction]


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ConfigError, CoefficientError, PartitionError)):
        return EXIT_CONFIG
    if isinstance(error, DivergenceError):
        return EXIT_DIVERGED
    if isinstance(error, SolverError):
        return EXIT_SOLVER
    return EXIT_FAILURE


@dataclass
class ExperimentResult:
    """Typed outcome of one experiment"""
    success: bool
    name: Optional[str] = None
    exit_code: int = EXIT_OK
    csv_path: Optional[str] = None
    summary_path: Optional[str] = None
    orders_path: Optional[str] = None
    summary: Optional[dict] = None
    error: Optional[str] = None
    diagnostics: list = field(default_factory=list)

    @classmethod
    def success_result(cls, name: str, summary: dict, csv_path: Optional[str] = None,
                       summary_path: Optional[str] = None, orders_path: Optional[str] = None) -> 'ExperimentResult':
        """Create a successful experiment result"""
        return cls(success=True, name=name, summary=summary, csv_path=csv_path,
                   summary_path=summary_path, orders_path=orders_path)

    @classmethod
    def error_result(cls, error: BaseException, name: Optional[str] = None,
                     csv_path: Optional[str] = None, summary_path: Optional[str] = None) -> 'ExperimentResult':
        """Create a failed experiment result carrying the exit code for the error"""
        return cls(success=False, name=name, exit_code=exit_code_for(error), error=str(error),
                   diagnostics=list(getattr(error, "diagnostics", [])), csv_path=csv_path,
                   summary_path=summary_path)


@dataclass(eq=False)
class ExperimentSetup:
    """Everything needed to build a fresh stepper for any τ"""
    config: ExperimentConfig
    grid: Grid2D
    problem: ModelProblem
    decomposition: Decomposition
    u0: GridFunction
    extra: dict
    reference: Optional[Reference]
    seed: Optional[int] = None

    @property
    def p(self) -> int:
        if self.config.is_system:
            return 2
        return getattr(self.decomposition, "p", 1)

    def scheme(self, tau: Optional[float] = None, steps: Optional[int] = None) -> SchemeConfig:
        return self.config.scheme.build(tau, steps)

    def stepper(self, scheme: Optional[SchemeConfig] = None) -> BaseStepper:
        return build_stepper(self.problem, self.decomposition, scheme or self.scheme(), self.u0, **self.extra)


def build_coefficient(config: ExperimentConfig) -> Coefficient:
    spec = config.coefficient
    if isinstance(spec, ConstantCoefficient):
        return Coefficient.constant(spec.value)
    if isinstance(spec, CheckerboardCoefficient):
        return Coefficient.checkerboard(spec.high, spec.low, config.grid.l1, config.grid.l2, spec.cells)
    if isinstance(spec, ExpressionCoefficient):
        return Coefficient.expression(spec.text, spec.kappa)
    raise ConfigError(f"Unsupported coefficient {type(spec).__name__}")


def build_forcing(config: ExperimentConfig, grid: Grid2D) -> Optional[GridForcing]:
    if config.forcing.type == "ZERO":
        return None
    return GridForcing.expression(grid, config.forcing.text)


def build_initial(config: ExperimentConfig, grid: Grid2D, seed_override: Optional[int] = None
                  ) -> tuple[GridFunction, Optional[int]]:
    """Initial data on the grid and the seed actually used, if any"""
    spec = config.initial
    if isinstance(spec, EigenmodeInitial):
        return eigenvector(grid, (spec.m1, spec.m2)), None
    if isinstance(spec, ConstantInitial):
        return np.full(grid.size, float(spec.value)), None
    if isinstance(spec, RandomInitial):
        seed = spec.seed if seed_override is None else seed_override
        rng = np.random.Generator(np.random.PCG64(seed))
        width = grid.size * (2 if config.is_system else 1)
        return rng.standard_normal(width), seed
    raise ConfigError(f"Unsupported initial data {type(spec).__name__}")


def build_decomposition(config: ExperimentConfig, grid: Grid2D, k: Coefficient,
                        a: SparseOperator) -> Decomposition:
    spec = config.decomposition
    kind = spec.kind
    if kind == DecompositionKind.NONE:
        return None
    if kind == DecompositionKind.DIRECTIONAL:
        return split_directional(grid, k)
    if kind == DecompositionKind.D_R_D and spec.vector == VectorRestriction.DIRECTIONS:
        factored = build_gradient_factor(grid, k, a)
        return decompose_DRD(factored, direction_restrictions(factored))

    pou = build_strip_partition(grid, spec.p, spec.overlap, spec.profile)
    if kind == DecompositionKind.CHI_A:
        return decompose_chiA(a, pou, Side.LEFT)
    if kind == DecompositionKind.A_CHI:
        return decompose_chiA(a, pou, Side.RIGHT)
    if kind == DecompositionKind.R_A:
        return decompose_R(a, restrictions_from_partition(pou), Side.LEFT)
    if kind == DecompositionKind.A_R:
        return decompose_R(a, restrictions_from_partition(pou), Side.RIGHT)
    if kind == DecompositionKind.D_R_D:
        factored = build_gradient_factor(grid, k, a)
        return decompose_DRD(factored, edge_restrictions(factored, pou))
    if kind == DecompositionKind.RESTRICTION:
        return restrictions_from_partition(pou)
    if kind == DecompositionKind.SPACE_RESTRICTION:
        return build_space_restrictions(pou)
    raise ConfigError(f"Unsupported decomposition {kind.value}")


def build_system(config: ExperimentConfig, a: SparseOperator) -> SystemState:
    """
    Blocks A11 = A, A22 = s·A, A12 = A21 = c·I

    Raises:
        ConfigError: When |c| >= √s·λ_min(A), so the block operator is not positive definite
    """
    spec = config.system
    n = a.rows
    coupling = SparseOperator.identity(n).scaled(spec.coupling)
    lam_min = smallest_eigenvalue_estimate(a)
    limit = math.sqrt(spec.a22_scale) * lam_min
    if abs(spec.coupling) >= limit:
        raise ConfigError(f"system.coupling={spec.coupling!r} must stay below {limit:.6g} in magnitude",
                          [f"system.coupling: |c| must be < √a22_scale·λ_min(A) = {limit:.6g}"])
    zeros = np.zeros(n)
    return SystemState(zeros, zeros.copy(), a, coupling, coupling, a.scaled(spec.a22_scale))


def build_reference(config: ExperimentConfig, grid: Grid2D, operator: SparseOperator,
                    u0: GridFunction) -> Optional[Reference]:
    wave = config.scheme.kind in SECOND_ORDER_KINDS
    kind = config.reference.kind
    if kind == ReferenceKind.NONE:
        return None
    if kind == ReferenceKind.EIGENMODE:
        mode = (config.initial.m1, config.initial.m2)
        c = config.coefficient.value
        solution = wave_eigenmode_reference if wave else eigenmode_reference
        return lambda t: solution(grid, mode, t, c)
    return DenseReference(operator.to_dense(), u0, wave=wave)


def _summary_base(setup: ExperimentSetup) -> dict:
    config = setup.config
    scheme = config.scheme
    threshold = stability_threshold(scheme.kind, setup.p)
    initial = config.initial.model_dump(mode="json")
    if setup.seed is not None:
        initial["seed"] = setup.seed
    return {
        "name": config.name,
        "scheme": scheme.kind.value,
        "ordering": scheme.ordering.value,
        "sigma": scheme.sigma,
        "tau": scheme.tau,
        "steps": scheme.steps,
        "t_final": scheme.steps * scheme.tau,
        "decomposition": config.decomposition.kind.value,
        "p": setup.p,
        "unknowns": setup.problem.size,
        "stability_threshold": threshold,
        "sigma_meets_threshold": scheme.sigma >= threshold,
        "initial": initial,
        "reference": config.reference.kind.value,
    }


def _terminal(record: RunRecord) -> dict:
    return {"n": record.n, "t": record.t, "norm_I": record.norm_I, "norm_A": record.norm_A,
            "norm_cert": record.norm_cert, "err_I": record.err_I, "err_A": record.err_A}


class ExperimentService:
    def __init__(self, output_root: Union[str, Path] = "output", seed_override: Optional[int] = None):
        """
        Initialize the experiment service

        Args:
            output_root: Parent of the per-experiment directories
            seed_override: Replaces the seed of RANDOM initial data
        """
        self.output_root = Path(output_root)
        self.seed_override = seed_override

    def output_dir(self, config: ExperimentConfig) -> Path:
        if config.outputs.directory:
            return Path(config.outputs.directory)
        return self.output_root / config.name

    def prepare(self, config: ExperimentConfig) -> ExperimentSetup:
        """Assemble operators, decomposition, initial data and reference"""
        grid = config.grid.build()
        k = build_coefficient(config)
        forcing = build_forcing(config, grid)
        problem = ModelProblem.assemble(grid, k, forcing)
        if self.seed_override is not None and not isinstance(config.initial, RandomInitial):
            logger.warning(f"⚠️  --seed ignored: {config.name} uses {config.initial.type} initial data")
        u0, seed = build_initial(config, grid, self.seed_override)

        extra: dict[str, Any] = {}
        if config.is_system:
            decomposition = build_system(config, problem.operator)
            problem = ModelProblem(decomposition.operator(), grid, k, None)
            if u0.size == grid.size:
                u0 = np.concatenate([u0, u0])
        else:
            decomposition = build_decomposition(config, grid, k, problem.operator)
        if config.scheme.kind in SECOND_ORDER_KINDS:
            extra["v0"] = np.zeros(problem.size)

        reference = build_reference(config, grid, problem.operator, u0)
        logger.info(f"✅ Prepared {config.name}: {problem.size} unknowns, "
                    f"{config.decomposition.kind.value} decomposition, scheme {config.scheme.kind.value}")
        return ExperimentSetup(config, grid, problem, decomposition, u0, extra, reference, seed)

    def _apriori(self, setup: ExperimentSetup, trajectory: list) -> AprioriCheck:
        scheme = setup.scheme()
        f_history = None
        if not setup.problem.homogeneous:
            f_history = [forcing_at_sigma(setup.problem.forcing_at(n * scheme.tau),
                                          setup.problem.forcing_at((n + 1) * scheme.tau), scheme.sigma)
                         for n in range(len(trajectory))]
        a = setup.problem.operator
        return apriori_check_thm1(trajectory, setup.u0, f_history, NormKind.energy(a), a, scheme.tau)

    def _order_block(self, setup: ExperimentSetup) -> dict:
        """Order study for the summary; a diverging level leaves the finished run intact"""
        try:
            return self.estimate_orders(setup).as_dict()
        except DivergenceError as e:
            logger.warning(f"⚠️ Order study for {setup.config.name} diverged: {e}")
            return {"status": "DIVERGED", "level_error": str(e)}

    def estimate_orders(self, setup: ExperimentSetup) -> OrderEstimate:
        """
        Terminal A-norm error on the τ-halving ladder at fixed t_final

        Raises:
            ConfigError: When no reference is attached, or t_final is not a whole
                number of steps at some level
        """
        config = setup.config
        orders = config.outputs.orders or OrdersSpec()
        if setup.reference is None:
            raise ConfigError(f"{config.name}: order estimation needs a reference",
                              ["reference.kind: EIGENMODE or EXPM is required for order studies"])
        t_final = config.scheme.steps * config.scheme.tau
        tau0 = orders.tau0 or config.scheme.tau

        def runner(tau: float) -> GridFunction:
            steps = int(round(t_final / tau))
            if steps < 1 or abs(steps * tau - t_final) > 1e-9 * max(t_final, 1.0):
                raise ConfigError(f"t_final={t_final!r} is not a multiple of τ={tau!r}")
            stepper = setup.stepper(setup.scheme(tau, steps))
            run_scheme(stepper, steps, instrument=False)
            return stepper.solution()

        logger.info(f"🚀 Order study for {config.name}: {orders.levels} levels from τ={tau0!r}")
        return estimate_order(runner, tau0, orders.levels, setup.reference(t_final),
                              NormKind.energy(setup.problem.operator), orders.max_workers)

    def run(self, config: ExperimentConfig, out_dir: Optional[Path] = None) -> ExperimentResult:
        """Run one experiment and write its CSV table and summary"""
        out_dir = Path(out_dir) if out_dir is not None else self.output_dir(config)
        csv_path = out_dir / f"{config.name}.csv"
        summary_path = out_dir / f"{config.name}-splitkit-summary.json"
        logger.info(f"🚀 Running {config.name} → {out_dir}")
        setup = None
        try:
            setup = self.prepare(config)
            trajectory: list = []
            observer = None
            if config.scheme.kind == SchemeKind.WEIGHTED:
                def observer(stepper: BaseStepper) -> None:
                    trajectory.append(stepper.solution().copy())
            records = run_scheme(setup.stepper(), config.scheme.steps, setup.reference,
                                 timing=config.outputs.timing, observer=observer)

            summary = _summary_base(setup)
            summary["status"] = "OK"
            summary["terminal"] = _terminal(records[-1])
            summary["certified_margin"] = certified_norm_margin(records)
            if config.scheme.kind == SchemeKind.WEIGHTED:
                check = self._apriori(setup, trajectory)
                summary["apriori"] = {"holds": check.holds, "margin": check.margin}
            write_table(records, csv_path)
            if config.outputs.orders is not None:
                summary["order"] = self._order_block(setup)
            write_json(summary, summary_path)
            logger.info(f"✅ {config.name} finished {config.scheme.steps} steps")
            return ExperimentResult.success_result(config.name, summary, str(csv_path), str(summary_path))
        except DivergenceError as e:
            logger.error(f"❌ {config.name} diverged at step {e.step}: {e}")
            if e.records:
                write_table(e.records, csv_path)
            if setup is not None:
                summary = _summary_base(setup)
                summary.update({"status": "DIVERGED", "diverged_at": e.step, "energy": e.energy})
                write_json(summary, summary_path)
            return ExperimentResult.error_result(e, config.name, str(csv_path), str(summary_path))
        except SplitkitError as e:
            logger.error(f"❌ {config.name} failed: {e}")
            return ExperimentResult.error_result(e, config.name)

    def run_orders(self, config: ExperimentConfig, out_dir: Optional[Path] = None) -> ExperimentResult:
        """Run only the τ-halving study and write <name>-orders.json"""
        out_dir = Path(out_dir) if out_dir is not None else self.output_dir(config)
        orders_path = out_dir / f"{config.name}-orders.json"
        try:
            setup = self.prepare(config)
            estimate = self.estimate_orders(setup)
            document = {"name": config.name, "scheme": config.scheme.kind.value, "sigma": config.scheme.sigma,
                        "t_final": config.scheme.steps * config.scheme.tau, "norm": "A", **estimate.as_dict()}
            write_json(document, orders_path)
            logger.info(f"✅ {config.name}: observed order {estimate.slope:.4f}")
            return ExperimentResult.success_result(config.name, document, orders_path=str(orders_path))
        except SplitkitError as e:
            logger.error(f"❌ {config.name} order study failed: {e}")
            return ExperimentResult.error_result(e, config.name)

    def run_path(self, path: Union[str, Path], out_dir: Optional[Path] = None,
                 orders_only: bool = False) -> ExperimentResult:
        """Load, validate and run one config file"""
        try:
            config = load_config(path)
        except ConfigError as e:
            for line in e.diagnostics:
                logger.error(f"❌ {line}")
            return ExperimentResult.error_result(e)
        if orders_only:
            return self.run_orders(config, out_dir)
        return self.run(config, out_dir)
