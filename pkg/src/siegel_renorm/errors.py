"""Exception hierarchy shared by all modules."""


class SiegelRenormError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(SiegelRenormError):
    """Inconsistent truncation orders, dimensions or configuration values."""


class DegenerateInputError(SiegelRenormError):
    """Input outside the domain where an operation is defined."""


class SingularDerivativeError(SiegelRenormError):
    """A derivative that must be nonzero vanishes."""


class ProjectionSingularError(SiegelRenormError):
    """The linear system of the almost-commuting projection is near singular."""

    def __init__(self, message: str, determinant: complex) -> None:
        super().__init__(message)
        self.determinant = determinant


class DegenerateScalingError(SiegelRenormError):
    """The scaling factor is too small to rescale by."""


class DifferentialSingularError(SiegelRenormError):
    """The linearised projection system is near singular."""


class SpectralError(SiegelRenormError):
    """Eigen-analysis failed or produced unusable output."""


class BasisError(SiegelRenormError):
    """An eigenvector basis is numerically singular."""


class DegenerateLineError(SiegelRenormError):
    """Invariant lines are undefined for a real scaling factor."""


class OrderingError(SiegelRenormError):
    """Multi-index subtraction requested for words that are not ordered."""


class CoordinateChangeError(SiegelRenormError):
    """Pointwise inversion of a planar coordinate change did not converge."""


class ProjectionError(SiegelRenormError):
    """A two-dimensional projection step could not be carried out."""


class RangeWarning(UserWarning):
    """A composed function is evaluated outside its disk of definition."""
