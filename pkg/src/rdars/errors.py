"""Exception types. All derive from ValueError so callers can catch broadly."""


class RdarsError(ValueError):
    pass


class InvalidDimension(RdarsError):
    pass


class GeometryError(RdarsError):
    pass


class InvalidPlan(RdarsError):
    pass


class OversamplingViolation(RdarsError):
    pass


class Infeasible(RdarsError):
    pass


class UnsupportedWeights(RdarsError):
    pass


class CapExceeded(RdarsError):
    pass


class ConfigError(RdarsError):
    pass


class ResolutionMismatch(RdarsError):
    pass
