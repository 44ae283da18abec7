"""Exception types raised across the package."""


class GasPstError(Exception):
    """Base class for all errors raised by gaspst."""


class InvalidParameter(GasPstError, ValueError):
    pass


class SizeLimit(GasPstError):
    pass


class MalformedTable(GasPstError, ValueError):
    pass


class NotAGroup(GasPstError, ValueError):
    pass


class DegeneracyFailure(GasPstError):
    """Random class-matrix combination kept producing repeated eigenvalues."""

    def __init__(self, message, seeds=()):
        super().__init__(message)
        self.seeds = tuple(seeds)


class NumericalFailure(GasPstError):
    pass


class NoPstTarget(GasPstError):
    pass


class NoSingletonClass(GasPstError):
    pass


class GaugeInconsistency(GasPstError):
    pass


class SearchExhausted(GasPstError):
    pass


class IncompatiblePlans(GasPstError):
    pass


class InvalidState(GasPstError, ValueError):
    pass
