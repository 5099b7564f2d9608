"""Exception hierarchy shared across the package."""


class QhgeoError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(QhgeoError):
    pass


class DegenerateCurve(QhgeoError):
    pass


class SingularDensity(QhgeoError):
    """A quadrature node fell inside the clipped boundary layer."""


class EmptyDomainSample(QhgeoError):
    pass


class DisconnectedSample(QhgeoError):
    def __init__(self, component_sizes):
        self.component_sizes = list(component_sizes)
        super().__init__(f"sampled region split into components of sizes {self.component_sizes}")


class PointOnBoundary(QhgeoError):
    pass


class Unreachable(QhgeoError):
    pass


class TooFewPoints(QhgeoError):
    pass


class UnknownLabel(QhgeoError):
    pass


class CoincidentPoints(QhgeoError):
    pass


class UnboundedSet(QhgeoError):
    pass


class EmptySet(QhgeoError):
    pass


class MapLeavesDomain(QhgeoError):
    def __init__(self, point, image):
        self.point = point
        self.image = image
        super().__init__(f"map sends {point} to {image}, outside the domain")


class RadiusTooLarge(QhgeoError):
    pass


class InvalidEpsilon(QhgeoError):
    pass


class EmptyShell(QhgeoError):
    pass


class EmptyCluster(QhgeoError):
    pass


class SchemaError(QhgeoError):
    """Config validation failure; carries one message per offending field."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnknownKind(SchemaError):
    pass
