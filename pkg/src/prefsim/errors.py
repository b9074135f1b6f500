"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(SimulationError, ValueError):
    """A parameter or configuration value is outside its documented domain."""


class UndefinedRatioError(SimulationError, ValueError):
    """A probability-ratio diagnostic hit a zero probability."""


class UnsupportedFormatError(SimulationError, ValueError):
    """The input's shape is one the operation is not defined for."""


class NumericError(SimulationError, RuntimeError):
    """A numeric routine failed to produce a finite, reliable result."""
