"""Exception types shared across the package."""


class HoloparError(Exception):
    """Base class for all package errors."""


class DomainError(HoloparError):
    """A point or curve left the declared chart domain."""


class SingularFrameError(HoloparError):
    """A frame (or trivialization) matrix is numerically singular."""


class RegularityError(HoloparError):
    """A curve has vanishing velocity somewhere on its domain."""


class DefinitenessError(HoloparError):
    """A norm fails the definiteness requirement f(v)=0 iff v=0."""


class IncompatibleParallelismError(HoloparError):
    """Basepoint independence of the pushed-down norm is violated.

    Carries the violating basepoint pair and the observed deviation.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class CoveringGapError(HoloparError):
    """Some sampled point of the working region is not covered."""


class IntegrationBlowupError(HoloparError):
    """An ODE integration produced non-finite values."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class PreconditionError(HoloparError):
    """A check was invoked outside its stated preconditions."""


class ConfigError(HoloparError):
    """Malformed run configuration (bad schema, unknown keys, bad expression)."""
