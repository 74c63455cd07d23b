"""Exception hierarchy shared by all hypervd modules.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4. Raise sites prefix messages with the owning module
name so failures stay attributable from the command line.
"""


class HyperVDError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HyperVDError):
    """Invalid configuration value, unknown key, or inconsistent settings."""


class CurvatureError(ConfigError):
    """Curvature must be strictly negative for the Lorentz model."""


class DataError(HyperVDError):
    """Problem with input data: missing files, shape mismatches, bad labels."""


class DimensionError(DataError):
    """Vector/matrix dimensions incompatible with the requested operation."""


class FormatError(DataError):
    """Malformed binary or text artifact; carries the offending byte offset."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UndefinedMetricError(DataError):
    """Metric has no defined value on this input (e.g. AP with no positives)."""


class NumericalError(HyperVDError):
    """Numerical failure: degenerate directions, non-finite gradients."""


class DegenerateDirectionError(NumericalError):
    """Hyperbolic linear layer produced a zero direction vector."""


class AggregationError(NumericalError):
    """Neighborhood aggregation received a weighted sum that is not time-like."""


class GradientError(NumericalError):
    """A parameter gradient came out non-finite."""
