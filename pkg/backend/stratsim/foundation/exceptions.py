"""Common exceptions module."""


class StratSimBaseError(Exception):
    """Base exception.

    All exceptions should be created from this.
    """


class InvalidArgumentError(StratSimBaseError):
    """Raised when an invalid argument is passed to a function."""


class NonzeroMeanError(InvalidArgumentError):
    """Raised when a mean-zero field is required and the zero mode is populated."""


class GridMismatchError(InvalidArgumentError):
    """Raised when arrays or fields do not live on the expected grid."""


class NumericalAbortError(StratSimBaseError):
    """Raised when an integration produces non-finite values.

    Attributes:
        last_valid_time (float): time of the last finite state
    """

    def __init__(self, message: str, last_valid_time: float = 0.0):
        """Init error.

        Args:
            message (str): error description
            last_valid_time (float): time of the last finite state. Defaults to 0.0.
        """
        super().__init__(message)
        self.last_valid_time = last_valid_time


class InsufficientDataError(StratSimBaseError):
    """Raised when too few samples or records are available for a fit."""


class ConfigurationError(StratSimBaseError):
    """Raised when a run configuration is not valid."""


class ConfigParseError(ConfigurationError):
    """Raised when a configuration file cannot be parsed."""


class UnknownConfigKeyError(ConfigurationError):
    """Raised when a configuration file contains keys that are not recognized."""


class CheckpointFormatError(StratSimBaseError):
    """Raised when a checkpoint file has a wrong magic tag or version."""


class TruncatedCheckpointError(CheckpointFormatError):
    """Raised when a checkpoint file ends before its declared payload."""
