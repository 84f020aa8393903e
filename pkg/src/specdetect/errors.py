"""Exception hierarchy shared by the library and the command line front-end."""


class SpecDetectError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SpecDetectError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(SpecDetectError, ValueError):
    """Data are valid in form but cannot support the statistic (zero power, zero denominators)."""


class NumericError(SpecDetectError, ArithmeticError):
    """A numerical procedure failed to converge or to bracket its target."""


class ConfigError(SpecDetectError):
    """Experiment configuration is malformed or inconsistent."""


class IngestionError(SpecDetectError):
    """A series file could not be parsed into a valid time series."""
