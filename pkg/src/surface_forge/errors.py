"""Exception hierarchy shared by all modules."""


class SurfaceForgeError(Exception):
    """Base class for numeric failures raised by the library."""

    module = "surface_forge"


class GridTooSmallError(SurfaceForgeError, ValueError):
    module = "quatgeo"


class DegenerateMetricError(SurfaceForgeError):
    module = "quatgeo"


class DegenerateNodeError(SurfaceForgeError):
    module = "quatgeo"

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PathDependenceError(SurfaceForgeError):
    """Line integrals along x-then-y and y-then-x disagree."""

    module = "integration"

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class ZeroSpinorError(SurfaceForgeError):
    module = "weierstrass"


class CompatibilityError(PathDependenceError):
    module = "frameflow"


class NonUnitNormalError(SurfaceForgeError):
    module = "frameflow"


class VanishingCoefficientError(SurfaceForgeError):
    module = "frameflow"


class QuadratureError(SurfaceForgeError):
    module = "thetagap"


class ThetaConvergenceError(SurfaceForgeError):
    module = "thetagap"


class ThetaDivisorError(SurfaceForgeError):
    module = "thetagap"


class SingularSystemError(SurfaceForgeError):
    module = "thetagap"


class PathInconsistencyError(SurfaceForgeError):
    module = "thetagap"


class HazzidakisError(SurfaceForgeError):
    module = "bonnetfam"


class SignFlipError(HazzidakisError):
    """H' reached zero, which the pole-exclusion lemma forbids."""


class DomainError(HazzidakisError, ValueError):
    pass


class RecurrenceBreakdownError(HazzidakisError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularLocusError(HazzidakisError):
    pass


class ExcludedFamilyError(HazzidakisError):
    pass


class ZeroDerivativeError(HazzidakisError, ZeroDivisionError):
    """H' vanishes where the equation divides by it."""


class DenominatorError(HazzidakisError, ZeroDivisionError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class PoleError(HazzidakisError):
    """The integrator stalled, which indicates a pole or a blow-up."""


class BonnetPairError(SurfaceForgeError):
    module = "bonnetpair"


class NonImmersionError(BonnetPairError):
    pass


class ClosednessError(BonnetPairError):
    pass


class ImaginaryLeakError(BonnetPairError):
    pass


class NormalizationError(BonnetPairError):
    pass
