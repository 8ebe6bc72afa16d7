"""Exception hierarchy shared by every submodule."""


class BispectralError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGroupError(BispectralError, ValueError):
    """A cyclic factor is smaller than 2 or a group spec cannot be parsed."""


class CapacityError(BispectralError, ValueError):
    """A request exceeds a configured size limit."""


class DomainError(BispectralError, ValueError):
    """Operands do not live on the same group or have mismatched lengths."""


class DegenerateInputError(BispectralError, ValueError):
    """An input maps to the zero vector where a normalization is required."""


class NumericError(BispectralError, ArithmeticError):
    """A non-finite value appeared in an intermediate quantity."""


class TrainingError(BispectralError, RuntimeError):
    """Training diverged. ``checkpoint`` holds the last finite weights."""

    def __init__(self, message, checkpoint=None, log=None):
        super().__init__(message)
        self.checkpoint = checkpoint
        self.log = log if log is not None else []


class SamplingError(BispectralError, ValueError):
    """A class-balanced batch cannot be drawn from the dataset."""


class ConfigError(BispectralError, ValueError):
    """A configuration value is out of range or inconsistent."""
