"""Exception hierarchy shared by all neatstream modules."""


class NeatStreamError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(NeatStreamError):
    """A configuration value is out of range or inconsistent."""


class InvalidDimensionError(NeatStreamError):
    """Feature dimension is zero, negative, or inconsistent across records."""


class IncompatibleGenomeError(NeatStreamError):
    """Two genomes cannot be combined (different input dimensions)."""


class CorruptGenomeError(NeatStreamError):
    """A genome violates a structural invariant (cycle, dangling endpoint...)."""


class InvalidInputError(NeatStreamError):
    """An activation or evaluation input does not meet its contract."""


class InvalidRecordError(NeatStreamError):
    """A record carries an illegal value (negative loan amount or interest)."""


class NoDataError(NeatStreamError):
    """An operation that requires records received none."""


class ParseError(NeatStreamError):
    """A file could not be parsed; carries the offending line number if known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
