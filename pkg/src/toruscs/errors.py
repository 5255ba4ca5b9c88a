"""Exception hierarchy.

Each class carries the process exit code the command-line harness maps it to.
"""


class TorusError(Exception):
    exit_code = 1


class ConfigError(TorusError, ValueError):
    """Invalid grid, config, or input data."""

    exit_code = 2


class BandLimitError(ConfigError):
    """The retained Fourier band cannot hold the requested object."""


class ResourceCapError(TorusError):
    exit_code = 3


class UnattainableToleranceError(TorusError):
    exit_code = 4


class QuantizationError(TorusError):
    """Symbol or operator matrix fails a structural check (e.g. Hermiticity)."""

    exit_code = 5


class SolverError(TorusError):
    exit_code = 6
