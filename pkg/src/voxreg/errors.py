"""Exception types raised by the registration pipeline."""


class RegistrationError(Exception):
    """Base class for all errors raised by this package."""


class EmptyCloudError(RegistrationError):
    """An operation that requires points received an empty cloud."""


class CloudFormatError(RegistrationError):
    """A cloud file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateNeighborhoodError(RegistrationError):
    """Normal estimation got fewer than 3 points or zero covariance."""


class NoReliablePointsError(RegistrationError):
    """Feature extraction found no point with a reliable normal."""


class MatchingError(RegistrationError):
    """Descriptor matching received an empty descriptor set."""


class InsufficientSupportError(RegistrationError):
    """Fewer than 3 positively weighted pairs were given to the pose fit."""


class RankDeficientError(RegistrationError):
    """The weighted point sets are collinear; the rotation is not unique."""


class SolverDegenerateError(RegistrationError):
    """A refit inside the robust solver lost its geometric support."""
