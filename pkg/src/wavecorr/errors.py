"""Exception hierarchy. The CLI maps each class to an exit code."""


class WavecorrError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(WavecorrError, ValueError):
    """Invalid parameters or run configuration."""

    exit_code = 2


class DataError(WavecorrError, ValueError):
    """Malformed or degenerate input data."""

    exit_code = 3


class NumericalError(WavecorrError, ArithmeticError):
    """Ill-conditioned input or a solver that failed to converge."""

    exit_code = 4
