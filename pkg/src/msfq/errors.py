"""Exception types raised across the package."""


class MSFQError(Exception):
    """Base class for package errors."""


class DomainError(MSFQError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ConfigError(MSFQError, ValueError):
    """Invalid configuration or override."""


class NumericalError(MSFQError, ArithmeticError):
    """A numerical routine failed (no bracket, step underflow, singular system...)."""


class TruncationError(NumericalError):
    """Fock-space truncation too small for the requested oracle run."""
