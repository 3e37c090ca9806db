"""Exception types used across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
model/constraint infeasibilities with 3.
"""


class RobpostError(Exception):
    """Base class for all package errors."""


class ParameterError(RobpostError, ValueError):
    """A distribution parameter is outside its domain."""


class InfeasibleIntervalError(RobpostError, ValueError):
    """A truncation interval or zone carries zero probability mass."""


class InitializationError(RobpostError, ValueError):
    """A latent vector satisfying the observed constraints cannot be built.

    The message names the violated constraint.
    """


class DegenerateScaleError(RobpostError, ValueError):
    """An order-statistic variance approximation hit a zero density."""


class DiagnosticsError(RobpostError, ValueError):
    """A chain is too short (or otherwise unfit) for the requested diagnostic."""


class ConfigError(RobpostError, ValueError):
    """A run configuration (CLI flags or config file) is invalid."""
