#!/usr/bin/env python3
"""
Run Monitors
Drive a stepper, record norms and errors, and check the two-level a-priori estimate.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from tools.errors import DivergenceError
from tools.analysis.records import RunRecord
from tools.linalg.krylov import cg_solve
from tools.linalg.norms import NormKind, NormTag, euclidean_norm, weighted_inner, weighted_norm
from tools.linalg.sparse_operator import GridFunction, SparseOperator
from tools.schemes.steppers import BaseStepper

logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e12
APRIORI_TOL = 1e-10

Reference = Callable[[float], GridFunction]


def _energy(a: SparseOperator, y: GridFunction) -> float:
    return weighted_inner(y, y, NormKind.energy(a))


def _record(stepper: BaseStepper, reference: Optional[Reference], instrument: bool,
            seconds: float) -> RunRecord:
    y = stepper.solution()
    nan = float("nan")
    if not instrument:
        return RunRecord(stepper.n, stepper.t, nan, nan, nan, nan, nan, seconds)
    energy = NormKind.energy(stepper.operator)
    err_i = err_a = nan
    if reference is not None:
        gap = y - reference(stepper.t)
        err_i, err_a = euclidean_norm(gap), weighted_norm(gap, energy)
    return RunRecord(stepper.n, stepper.t, euclidean_norm(y), weighted_norm(y, energy),
                     stepper.certified_norm(), err_i, err_a, seconds)


def run_scheme(stepper: BaseStepper, steps: int, reference: Optional[Reference] = None,
               instrument: bool = True, timing: bool = False,
               observer: Optional[Callable[[BaseStepper], None]] = None) -> list[RunRecord]:
    """
    Advance a stepper and collect one record per level, n = 0..steps

    Args:
        stepper: Freshly built stepper at n = 0
        steps: Number of steps
        reference: t -> exact solution, or None
        instrument: False leaves every norm NaN; the trajectory is unaffected
        timing: Measure wall-clock seconds per step, else record 0.0
        observer: Called with the stepper after every accepted step

    Raises:
        DivergenceError: When ‖y‖²_A passes 1e12 times its initial value or the
            solution stops being finite; carries the records so far
    """
    records = [_record(stepper, reference, instrument, 0.0)]
    initial = _energy(stepper.operator, stepper.solution())
    limit = DIVERGENCE_FACTOR * initial if initial > 0.0 else math.inf
    for _ in range(steps):
        started = time.perf_counter() if timing else 0.0
        y = stepper.step()
        seconds = time.perf_counter() - started if timing else 0.0
        energy = _energy(stepper.operator, y) if np.all(np.isfinite(y)) else math.inf
        if not math.isfinite(energy) or energy > limit:
            logger.warning(f"⚠️ Divergence at step {stepper.n}: energy {energy:.3e} vs initial {initial:.3e}")
            raise DivergenceError(f"Energy sentinel fired at step {stepper.n}", stepper.n, energy, records)
        records.append(_record(stepper, reference, instrument, seconds))
        if observer is not None:
            observer(stepper)
    return records


@dataclass(frozen=True)
class AprioriCheck:
    """holds is True when every level satisfies the estimate; margin is min(rhs - lhs)"""
    holds: bool
    margin: float


def forcing_norm_squared(f: GridFunction, d: NormKind, a: SparseOperator) -> float:
    """‖f‖²_{DA⁻¹} = (D A⁻¹ f, f)"""
    if d.tag == NormTag.A:
        return float(np.dot(f, f))
    return float(np.dot(d.weight(cg_solve(a, f)), f))


def apriori_check_thm1(trajectory: Sequence[GridFunction], u0: GridFunction,
                       f_history: Optional[Sequence[GridFunction]], d: NormKind, a: SparseOperator,
                       tau: float) -> AprioriCheck:
    """
    Check ‖y^{n+1}‖²_D <= ‖u^0‖²_D + ½ Σ_{k<=n} τ‖f^{k+σ}‖²_{DA⁻¹} at every level

    Args:
        trajectory: y^1, ..., y^N of the weighted scheme
        u0: Initial data
        f_history: f^{k+σ} for k = 0..N-1, or None for f = 0
        d: Norm weight D
        a: Problem operator
        tau: Step

    Returns:
        AprioriCheck; holds allows a slack of 1e-10·max(‖u^0‖²_D, max rhs)
    """
    rhs = weighted_norm(u0, d) ** 2
    initial = rhs
    margin = math.inf
    for n, y in enumerate(trajectory):
        if f_history is not None:
            rhs += 0.5 * tau * forcing_norm_squared(np.asarray(f_history[n]), d, a)
        margin = min(margin, rhs - weighted_norm(y, d) ** 2)
    if margin == math.inf:
        margin = 0.0
    slack = APRIORI_TOL * max(initial, rhs)
    return AprioriCheck(margin >= -slack, margin)
