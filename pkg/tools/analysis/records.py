"""Per-step run records and the certified-norm margin."""

import math
from dataclasses import astuple, dataclass, fields
from typing import Sequence


@dataclass(frozen=True)
class RunRecord:
    """One completed step; errors are NaN when no reference is attached"""
    n: int
    t: float
    norm_I: float
    norm_A: float
    norm_cert: float
    err_I: float
    err_A: float
    step_seconds: float = 0.0

    def as_row(self) -> tuple:
        return astuple(self)


CSV_COLUMNS = tuple(f.name for f in fields(RunRecord))


def certified_norm_margin(records: Sequence[RunRecord]) -> float:
    """
    Worst step-to-step decrease of the certified norm, relative to its first value

    Non-negative when the norm never grows; NaN entries are skipped.
    """
    values = [r.norm_cert for r in records if not math.isnan(r.norm_cert)]
    if len(values) < 2:
        return 0.0
    scale = max(abs(values[0]), 1e-300)
    return min((before - after) / scale for before, after in zip(values, values[1:]))
