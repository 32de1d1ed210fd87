"""Exception types shared across the package."""


class AfdmError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AfdmError):
    """Invalid or inconsistent configuration (sizes, rates, prefixes)."""


class ParameterError(AfdmError):
    """A parameter violates an operation's contract."""


class NumericalError(AfdmError):
    """A numerical step failed (singular or badly conditioned system)."""
