"""Convergence-order estimation under τ-halving."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from tools.errors import DivergenceError
from tools.linalg.norms import NormKind, weighted_norm
from tools.linalg.sparse_operator import GridFunction

logger = logging.getLogger(__name__)

SATURATION_TOL = 1e-11

Runner = Callable[[float], GridFunction]


@dataclass(frozen=True)
class OrderEstimate:
    taus: tuple
    errors: tuple
    slope: float
    ratios: tuple
    saturated: bool = False

    def as_dict(self) -> dict:
        return {"taus": list(self.taus), "errors": list(self.errors), "slope": self.slope,
                "ratios": list(self.ratios), "saturated": self.saturated}


def _run_level(runner: Runner, level: int, tau: float) -> GridFunction:
    try:
        result = np.asarray(runner(tau), dtype=np.float64)
    except DivergenceError as e:
        raise DivergenceError(f"Level {level} (τ={tau!r}) diverged: {e}", e.step, e.energy, e.records) from e
    if not np.all(np.isfinite(result)):
        raise DivergenceError(f"Level {level} (τ={tau!r}) produced non-finite values")
    return result


def estimate_order(runner: Runner, tau0: float, levels: int, reference: GridFunction, norm: NormKind,
                   max_workers: int = 1) -> OrderEstimate:
    """
    Run at τ0, τ0/2, ... and fit log(error) against log(τ)

    Args:
        runner: τ -> terminal solution
        tau0: Coarsest step
        levels: Number of levels, at least 3
        reference: Exact terminal solution
        norm: Norm of the terminal error
        max_workers: Levels run concurrently on this many threads

    Returns:
        OrderEstimate; saturated with NaN slope when every error is at roundoff
    """
    if levels < 3:
        raise ValueError(f"Order estimation needs at least 3 levels, got {levels}")
    taus = tuple(tau0 / 2 ** level for level in range(levels))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers, levels)) as executor:
            outputs = list(executor.map(lambda args: _run_level(runner, *args), enumerate(taus)))
    else:
        outputs = [_run_level(runner, level, tau) for level, tau in enumerate(taus)]

    errors = tuple(weighted_norm(out - reference, norm) for out in outputs)
    floor = SATURATION_TOL * max(1.0, weighted_norm(reference, norm))
    if all(e <= floor for e in errors):
        logger.info(f"Errors saturated at roundoff (max {max(errors):.2e})")
        return OrderEstimate(taus, errors, math.nan, tuple(math.nan for _ in errors[1:]), True)

    logged = np.log(np.maximum(errors, np.finfo(float).tiny))
    slope = float(np.polyfit(np.log(taus), logged, 1)[0])
    ratios = tuple(float((logged[i] - logged[i + 1]) / math.log(2.0)) for i in range(levels - 1))
    logger.debug(f"Observed order {slope:.4f} over τ = {taus}")
    return OrderEstimate(taus, errors, slope, ratios, False)
