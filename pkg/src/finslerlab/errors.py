"""Shared exception types."""


class FinslerLabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FinslerLabError):
    """Evaluation left the valid domain (singular locus, division by zero, ...).

    The offending base point, when known, is attached as ``point``.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point

    def __str__(self):
        base = super().__str__()
        if self.point is not None:
            return f"{base} (at point {tuple(float(p) for p in self.point)})"
        return base


class GeometryError(FinslerLabError):
    """Degenerate geometric data: non-SPD metric, singular fundamental tensor."""


class ConfigurationError(FinslerLabError):
    """Invalid setup: bad parameters, dependent fit basis, too few probes."""


class PreconditionError(FinslerLabError):
    """An operation was called on data violating its stated precondition."""
