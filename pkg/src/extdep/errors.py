"""Exception hierarchy. Each class maps to a stable CLI exit code."""


class ExtdepError(Exception):
    exit_code = 1


class ConfigError(ExtdepError, ValueError):
    """Malformed configuration, JSON document or command-line flags."""

    exit_code = 2


class ModelError(ExtdepError, ValueError):
    """A model, margin or partition invariant is violated."""

    exit_code = 3


class NotSimulableError(ExtdepError):
    exit_code = 4


class DataError(ExtdepError, ValueError):
    """Input data cannot be used by the requested estimator."""

    exit_code = 5


class GridTooLargeError(ExtdepError, ValueError):
    exit_code = 6


class ConvergenceError(DataError):
    pass


class UnknownComponentError(ModelError):
    """A mixture names a component copula outside the catalog."""
