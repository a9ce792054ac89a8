"""Exception types shared across the package."""


class CylrisError(Exception):
    """Base class for package errors."""


class ConfigError(CylrisError):
    """Invalid or inconsistent run configuration."""


class BudgetExceededError(CylrisError):
    """Requested enumeration exceeds the configured evaluation budget."""


class NumericalError(CylrisError):
    """A numerical step failed (singular system, non-finite values, ...)."""
