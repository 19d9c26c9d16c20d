class AdetagError(Exception):
    """Base class for toolkit errors."""


class ParseError(AdetagError):
    """A file could not be parsed under the declared format."""


class ValidationError(AdetagError):
    """Parsed data violated an invariant (bad span, missing token, ...)."""


class ConfigError(AdetagError):
    """Invalid configuration value or missing configuration resource."""
