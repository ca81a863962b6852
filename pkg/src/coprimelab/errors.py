"""Error types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the range an operation is defined for."""


class ParseError(ValueError):
    """A file or stream is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
