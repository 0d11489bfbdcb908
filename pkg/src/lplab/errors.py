"""Exception types shared across the package."""


class LplabError(ValueError):
    """Base class for all errors raised by lplab."""


class DomainError(LplabError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(LplabError):
    """A documented precondition on the input state is violated."""


class InvalidDataError(LplabError):
    """Field data is malformed (non-finite samples, wrong shape, ...)."""


class GridMismatchError(LplabError):
    """Two fields that must share a grid do not."""
