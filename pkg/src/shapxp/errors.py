"""Exception hierarchy shared by all shapxp modules."""


class ShapxpError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ShapxpError):
    """A point or value falls outside the declared feature space."""


class ValidationError(ShapxpError):
    """A model, sample or file violates a structural invariant."""


class NumericOutputError(ShapxpError):
    """An operation needing numeric outputs was given categorical ones."""


class UnsupportedOperationError(ShapxpError):
    """The operation is not defined for this model kind."""


class PreconditionError(ShapxpError):
    """A documented precondition of an operation does not hold."""


class SizeLimitError(ShapxpError):
    """The problem exceeds the guard for exhaustive computation."""
