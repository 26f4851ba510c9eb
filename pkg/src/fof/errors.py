"""Exception types shared across the package."""


class FofError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInputError(FofError):
    """An operation received an empty mesh or point set."""


class DegenerateInputError(FofError):
    """Input geometry has no usable extent (e.g. zero surface area)."""


class DomainError(FofError):
    """A numeric argument is outside its documented domain."""


class ShapeError(FofError):
    """Array shapes or term counts of two operands do not match."""


class PreconditionError(FofError):
    """A documented precondition was violated (e.g. unsorted events)."""


class ParseError(FofError):
    """A mesh file could not be parsed.

    Carries the 1-based line number for text formats when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(FofError):
    """A binary container is malformed (bad magic, truncated payload, ...)."""
