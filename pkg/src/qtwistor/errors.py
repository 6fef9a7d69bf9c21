"""Exception hierarchy shared by all qtwistor modules."""


class QTwistorError(Exception):
    """Base class for every error raised by qtwistor."""

    reason = "Error"


class DivisionByZero(QTwistorError, ZeroDivisionError):
    reason = "DivisionByZero"


class NotHLinear(QTwistorError):
    reason = "NotHLinear"


class ZeroMap(QTwistorError):
    """The map is (numerically) zero, so its sphere map is not unique."""

    reason = "ZeroMap"


class NotQuaternionic(QTwistorError):
    reason = "NotQuaternionic"


class ProjectiveError(QTwistorError):
    reason = "ProjectiveError"


class KernelPoint(ProjectiveError):
    """The point lies in the projectivised kernel of the matrix."""

    reason = "KernelPoint"


class PoleError(ProjectiveError):
    reason = "PoleError"


class ChartError(ProjectiveError):
    """The point is not in the affine chart where the first coordinate is nonzero."""

    reason = "ChartError"


class ZeroVector(ProjectiveError):
    reason = "ZeroVector"


class InsufficientSamples(ProjectiveError):
    reason = "InsufficientSamples"


class AmbiguousRecovery(ProjectiveError):
    reason = "AmbiguousRecovery"


class InconsistentSamples(ProjectiveError):
    reason = "InconsistentSamples"


class RankTooLow(ProjectiveError):
    reason = "RankTooLow"


class DomainEscape(QTwistorError):
    """A finite-difference stencil left the declared domain of the map."""

    reason = "DomainEscape"


class NotQuaternionicAt(QTwistorError):
    reason = "NotQuaternionicAt"

    def __init__(self, point, message=None):
        self.point = point
        super().__init__(message or f"differential is not quaternionic at {point!r}")
