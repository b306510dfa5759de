"""Exception hierarchy.

Each class maps onto one CLI exit code, so callers can tell failure
classes apart without parsing messages.
"""


class FilamentNoiseError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(FilamentNoiseError, ValueError):
    """Invalid parameters or an unparsable configuration file.

    ``problems`` lists every problem found, not only the first one.
    """

    exit_code = 2

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class FormatError(FilamentNoiseError, OSError):
    """Unreadable or malformed ensemble, CSV or metrics file."""

    exit_code = 3


class TruncatedFileError(FormatError):
    """Binary payload shorter than its header announces."""


class NumericalError(FilamentNoiseError, ArithmeticError):
    """Propagation failed numerically."""

    exit_code = 4


class GuardBandError(NumericalError):
    """Energy reached the edge of the time window (wraparound risk)."""


class NonConvergenceError(NumericalError):
    """Step control asked for a step below the minimum allowed size."""


class ShotFailedError(NumericalError):
    """A single shot of an ensemble run failed; carries the shot index."""

    def __init__(self, shot_index, cause):
        super().__init__(f"shot {shot_index} failed: {cause}")
        self.shot_index = shot_index
        self.cause = cause


class DegenerateStatisticsError(FilamentNoiseError, ValueError):
    """A statistic is undefined for the given data (zero variance, too few shots)."""

    exit_code = 5
