"""Exception types shared across the package."""


class ParaconvexError(Exception):
    """Base class for all structured errors raised by this package."""


class DimensionMismatch(ParaconvexError):
    """Inputs live in different or unsupported ambient dimensions."""


class EmptyIntersection(ParaconvexError):
    """A ball does not contain any point of the target set."""

    def __init__(self, message, center=None, radius=None):
        super().__init__(message)
        self.center = center
        self.radius = radius


class ConvergenceFailure(ParaconvexError):
    """An iteration exhausted its budget above the requested tolerance."""

    def __init__(self, message, iterate=None, residual=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


class ContractionNotCertified(ParaconvexError):
    """A contraction factor does not dominate the measured nonconvexity."""


class PreconditionFailure(ParaconvexError):
    """A documented precondition failed; carries the offending witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParaconvexityWarning(UserWarning):
    """Emitted when a construction runs outside its certified regime."""
