"""Exception hierarchy shared by every module."""


class MultiplicityError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(MultiplicityError, ValueError):
    """An argument is outside its documented domain."""


class SchemaError(MultiplicityError, ValueError):
    """Input data does not match the expected layout."""


class ParseError(MultiplicityError, ValueError):
    """A cell could not be parsed; carries the offending row and column."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class IncompatibleDatasetsError(MultiplicityError, ValueError):
    """Two datasets cannot be compared (e.g. different shapes)."""


class DegenerateDataError(MultiplicityError, ValueError):
    """Data is valid but unusable, e.g. a single class or a fully missing column."""


class NumericError(MultiplicityError, ValueError):
    """Non-finite values where finite ones are required."""


class ShapeError(MultiplicityError, ValueError):
    """Feature dimensionality does not match the fitted model."""


class EmptyRashomonSetError(MultiplicityError):
    """No pool member satisfies the loss threshold; epsilon is too small."""


class UnsupportedInstanceError(MultiplicityError):
    """The instance is outside what the brute-force verifier can handle."""


class ConfigError(MultiplicityError, ValueError):
    """Experiment configuration failed validation; ``path`` locates the field."""

    def __init__(self, message, path=()):
        self.path = tuple(path)
        super().__init__(f"{self.location}: {message}")

    @property
    def location(self):
        """The path as ``$.field[index]...``."""
        out = "$"
        for p in self.path:
            out += f"[{p}]" if isinstance(p, int) else f".{p}"
        return out
