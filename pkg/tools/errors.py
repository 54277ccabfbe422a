"""
Exception hierarchy shared by every splitkit package.

The service layer maps these onto CLI exit codes, so new failure modes should
subclass one of the families below rather than raising bare exceptions.
"""

from typing import Any, Optional, Sequence


class SplitkitError(Exception):
    """Base class for all library errors"""


class DimensionMismatchError(SplitkitError, ValueError):
    """Operand shapes do not agree"""


class SolverError(SplitkitError):
    """An iterative solve or eigenvalue iteration failed"""


class ConvergenceError(SolverError):
    """Iteration cap reached before the tolerance was met"""

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class IndefiniteOperatorError(SolverError):
    """Conjugate gradients met a direction of non-positive curvature"""


class CoefficientError(SplitkitError, ValueError):
    """The diffusion coefficient is not admissible at a sampled point"""

    def __init__(self, message: str, point: Optional[tuple] = None):
        super().__init__(message)
        self.point = point


class PartitionError(SplitkitError, ValueError):
    """A partition of unity or restriction family is malformed"""


class DecompositionError(SplitkitError):
    """An operator family failed reconstruction or cannot be used as requested"""


class SingularRestrictedSystemError(SolverError):
    """A restricted sub-problem has a zero weight inside its declared support"""


class DivergenceError(SplitkitError):
    """The energy sentinel fired during time stepping"""

    def __init__(self, message: str, step: int = -1, energy: float = float("nan"),
                 records: Optional[Sequence[Any]] = None):
        super().__init__(message)
        self.step = step
        self.energy = energy
        self.records = list(records) if records is not None else []


class ConfigError(SplitkitError, ValueError):
    """An experiment configuration is invalid"""

    def __init__(self, message: str, diagnostics: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])
