"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands live on state spaces of different sizes."""


class InvalidDistributionError(ValueError):
    """Vector is not a probability distribution (negative mass or bad total)."""


class InvalidMatrixError(ValueError):
    """Matrix is not row-stochastic within tolerance."""


class SpecFormatError(ValueError):
    """A kernel spec document violates the file schema."""


class AssumptionViolationError(ValueError):
    """Base and perturbed kernels are not equivalent, so no density ratio exists."""


class UndefinedRatioError(ValueError):
    """Density ratio requested along a trajectory with a zero-probability step."""


class SearchFailedError(RuntimeError):
    """An n-search exhausted its cap without satisfying the target inequality."""
