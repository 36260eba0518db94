"""Exceptions raised by newformology computations."""


class NewformologyError(Exception):
    """Base for all newformology exceptions."""


class NotInvertibleError(NewformologyError):
    """Exception that indicates a matrix or scalar that must be invertible is singular."""


class UnsupportedError(NewformologyError):
    """Exception that indicates a prime, extension, or representation combination outside the supported range."""


class ModulusOverflowError(NewformologyError):
    """Exception that indicates a cyclotomic modulus grew beyond the configured cap."""


class ParameterRangeError(NewformologyError):
    """Exception that indicates a numerical parameter outside its validated range."""


class ConstraintError(NewformologyError):
    """Exception that indicates input data violates a required algebraic constraint."""


class VerificationError(NewformologyError):
    """Exception that indicates an internal identity failed while building a result."""

    def __init__(self, message: str, witness: object = None) -> None:
        """Initialize the error with an optional counterexample.

        Args:
            message: Human readable reason for the failure.
            witness: The data that demonstrates the failure.
        """
        super().__init__(message)
        self.witness = witness


class RefinementError(VerificationError):
    """Exception that indicates a locally constant quantity changed when the congruence level was refined."""


class CacheError(NewformologyError):
    """Exception that indicates an unreadable or unwritable cache entry."""


class ConfigError(NewformologyError):
    """Exception that indicates an invalid run configuration."""
