"""Exception hierarchy shared across the package."""


class MajoflowError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(MajoflowError):
    """Operands have incompatible shapes or an invalid dimension."""


class InvariantViolation(MajoflowError):
    """An input fails a contract it was required to satisfy (Hermiticity,
    unitarity, stochasticity, ...)."""


class NotComparableError(MajoflowError):
    """Vectors cannot be compared under majorization (totals differ)."""


class NotMajorizedError(MajoflowError):
    """A construction requiring x majorized by y was called on a pair
    where it fails."""


class DecompositionError(MajoflowError):
    """A matrix decomposition could not be completed (numerical
    degeneracy, residual mass, no perfect matching)."""


class IntegrationDivergedError(MajoflowError):
    """State validation failed mid-trajectory."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NotCompletelyPositiveError(MajoflowError):
    """Choi matrix has an eigenvalue below the negativity tolerance."""


class ScenarioError(MajoflowError):
    """Scenario file failed to parse or validate."""
