"""Exception hierarchy shared by the library and the CLI.

Exit-code contract used by the CLI: 0 success, 1 input/validation,
2 parameters, 3 internal.
"""


class PmgError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class ValidationError(PmgError):
    """Bad input data: missing file, non-finite values, empty cloud."""

    exit_code = 1


class FormatError(ValidationError):
    """Malformed input file (e.g. ragged CSV rows)."""


class ParameterError(PmgError):
    """Out-of-range or inconsistent parameters (bad k, negative tau, ...)."""

    exit_code = 2


class DegenerateFrameError(PmgError):
    """Local covariance has no usable eigenvectors (coincident neighbors)."""


class UndefinedCorrelationError(ValidationError):
    """Pearson correlation is undefined (zero variance in one sequence)."""
