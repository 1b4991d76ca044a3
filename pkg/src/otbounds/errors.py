"""Exception types raised across the package."""


class OTBoundsError(Exception):
    """Base class for all package errors."""


class NonIntegrableError(OTBoundsError):
    pass


class QuadratureError(OTBoundsError):
    pass


class BracketError(OTBoundsError):
    pass


class HypothesisViolation(OTBoundsError):
    """A hypothesis inequality fails; ``witness`` holds the offending point."""

    def __init__(self, message, *, system=None, quantity=None, witness=None, value=None):
        super().__init__(message)
        self.system = system
        self.quantity = quantity
        self.witness = None if witness is None else [float(w) for w in witness]
        self.value = None if value is None else float(value)


class UnboundedError(HypothesisViolation):
    """A supremum diverges; ``trend`` is the log-log growth exponent seen in the tail."""

    def __init__(self, message, *, trend=None, **kw):
        super().__init__(message, **kw)
        self.trend = None if trend is None else float(trend)


class ConditionViolated(OTBoundsError):
    pass


class SolverError(OTBoundsError):
    """Entropic solver failure; ``trace`` is the per-stage iteration log."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class TailTooHeavy(OTBoundsError):
    pass


class RadiusOutOfRange(OTBoundsError):
    pass


class KindMismatch(OTBoundsError):
    pass


class ConfigError(OTBoundsError):
    """Invalid experiment config; ``path`` is the dotted field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
