"""Exception hierarchy for qdlab."""


class QDLabError(Exception):
    """Base class for all qdlab errors."""


class DomainError(QDLabError):
    pass


class PointOutsideDomain(DomainError):
    pass


class EvaluationAtPuncture(DomainError):
    pass


class DomainMismatch(DomainError):
    pass


class ExpressionError(QDLabError):
    """Malformed s-expression or weight mismatch in a quadratic differential."""


class MapNotConverged(QDLabError):
    pass


class QuadratureNotConverged(QDLabError):
    def __init__(self, msg, estimate=None, error=None):
        super().__init__(msg)
        self.estimate = estimate
        self.error = error


class ParameterSolverDivergence(MapNotConverged):
    pass


class ZeroOnChartBoundary(QDLabError):
    pass


class BranchContinuationFailure(QDLabError):
    pass


class StartAtZero(QDLabError):
    pass


class StepCollapse(QDLabError):
    pass


class ZeroOnBoundary(QDLabError):
    pass


class ArcExitsDomain(QDLabError):
    pass


class ClassSpecInvalid(QDLabError):
    pass


class GridTooCoarse(QDLabError):
    pass


class NotACrosscut(QDLabError):
    pass


class InterleavingWithinLamination(QDLabError):
    pass


class AmbientMismatch(QDLabError):
    pass


class ExcessiveUnassignedMass(QDLabError):
    pass


class GridDegenerate(QDLabError):
    pass


class RegionsOverlap(QDLabError):
    pass


class FamilyNotRepresentable(QDLabError):
    pass


class ConfigurationInvalid(QDLabError):
    pass
