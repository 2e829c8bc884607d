"""Mechanical squeezed-Fock-qubit gravimeter: effective model, Fisher information and oracles."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, MSFQError, NumericalError, TruncationError
from .params import DerivedParams, SensorConfig, derive, derive_raw

__all__ = [
    "ConfigError",
    "DerivedParams",
    "DomainError",
    "MSFQError",
    "NumericalError",
    "SensorConfig",
    "TruncationError",
    "__version__",
    "derive",
    "derive_raw",
]
