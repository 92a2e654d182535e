"""Exception and warning classes shared across the package."""


class UTMError(Exception):
    """Base class for all errors raised by utmsys."""


class DegenerateBranchesError(UTMError):
    """Two dispersion branches coincide where distinct branches are required."""


class BranchTrackingError(UTMError):
    """Continuation of polynomial roots failed (step underflow or iteration cap)."""


class SymmetryTrackingError(BranchTrackingError):
    """Two symmetry roots collided along the continuation path."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class DiscriminantError(UTMError):
    """The discriminant of the dispersion relation vanishes identically."""


class LabelingError(UTMError):
    """Asymptotic behaviour does not distinguish the branches."""


class DivergenceError(UTMError):
    """The half-line transform integral does not converge at the requested k."""


class NonDecayingTailError(UTMError):
    """An integrand fails to decay at the truncation radius of a contour."""


class TopologyError(UTMError):
    """The boundary of the inaccessible region could not be traced consistently."""


class UnsupportedCaseError(UTMError):
    """The requested problem lies outside what the method (or this package) handles."""


class SingularSystemError(UTMError):
    """The elimination matrix is singular at the requested k."""


class GridTooCoarseError(UTMError):
    """A finite-difference stencil does not fit on the supplied grid."""


class InstabilityError(UTMError):
    """The finite-difference reference solution grew beyond its bound."""


class ConfigError(UTMError):
    """A problem configuration could not be parsed."""


class ToleranceWarning(UserWarning):
    """A quadrature did not reach the requested tolerance."""
