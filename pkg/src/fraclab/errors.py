"""Exception types shared across the package."""


class FraclabError(Exception):
    """Base class for all library errors."""


class StructuralError(FraclabError):
    """A value does not match its declared shape, length, or encoding."""


class DomainError(FraclabError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class PreconditionError(FraclabError):
    """Input data violates a numerical precondition of an operation."""


class PlanError(FraclabError):
    """A sampling plan is empty, degenerate, or unusable on this grid."""


class ConstructionError(FraclabError):
    """A profile or partition cannot be built from the given ingredients."""


class PoleError(DomainError):
    """Parameters sit on, or numerically too close to, a pole."""
