"""Exception hierarchy shared across the package."""


class GmekitError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(GmekitError, ValueError):
    """Malformed or out-of-range input (shapes, indices, parameters)."""


class StateInvariantError(GmekitError, ValueError):
    """A state violates normalization, hermiticity or positivity."""


class PartitionRelationError(InvalidArgumentError):
    """A coarsening precondition between two partitions does not hold."""


class PartitionSizeError(InvalidArgumentError):
    """Exhaustive partition enumeration requested beyond the size guard."""


class StateFormatError(InvalidArgumentError):
    """State JSON that is malformed or does not follow the schema.

    ``path`` is a JSON path such as ``$.amplitudes[3]``; ``line`` and
    ``column`` are 1-based positions in the source text when known.
    """

    def __init__(self, message: str, path: str = "$", line: int | None = None,
                 column: int | None = None, source: str | None = None):
        self.path, self.line, self.column, self.source = path, line, column, source
        where = source or "<state>"
        if line is not None:
            where += f":{line}:{column}"
        super().__init__(f"{where}: {path}: {message}")
