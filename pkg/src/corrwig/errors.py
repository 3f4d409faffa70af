"""Exception types shared across the package."""


class CorrwigError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CorrwigError):
    """Invalid parameters, malformed configs, or violated preconditions."""


class EnumerationGuardError(ConfigurationError):
    """An exact-enumeration request exceeds the resource guard."""


class UnsupportedModelError(ConfigurationError):
    """An operation was asked to use a covariance model it cannot handle."""


class NumericalError(CorrwigError):
    """A numerical routine failed to converge or produced inconsistent output."""
