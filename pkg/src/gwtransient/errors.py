"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class FormatError(ValueError):
    """A file could not be parsed.

    ``offset`` is the byte offset (binary formats) and ``line`` the 1-based
    line number (text formats) at which parsing failed, when known.
    """

    def __init__(self, message, *, offset=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"byte offset {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.offset = offset
        self.line = line


class NumericalError(ArithmeticError):
    """A numerical routine failed (singular system, non-finite values)."""
