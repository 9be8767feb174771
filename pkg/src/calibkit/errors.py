"""Exception hierarchy shared by the library and the command line."""


class CalibkitError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(CalibkitError, ValueError):
    exit_code = 2


class IngestError(CalibkitError, ValueError):
    """A prediction file or fitted-map document could not be loaded."""

    exit_code = 3

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class NumericError(CalibkitError, ValueError):
    exit_code = 4


class DegenerateVector(NumericError):
    """A vector cannot be normalized onto the simplex."""


class InvalidClass(NumericError, IndexError):
    pass


class EmptyData(NumericError):
    pass


class InvalidBandwidth(NumericError):
    pass


class DomainError(NumericError):
    pass


class DimensionError(NumericError):
    """Fitted map and data disagree on the number of classes."""
