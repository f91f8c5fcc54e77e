"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """A parameter value or combination the model cannot be evaluated at."""


class DivergentMomentError(ConfigurationError):
    """The requested path-loss moment integral does not converge."""


class ValidationError(ValueError):
    """An explicitly supplied object (e.g. a pilot matrix) is malformed."""
