"""Exception types shared across the package."""


class LowlightForgeError(Exception):
    """Base class for errors raised by this package."""


class FormatError(LowlightForgeError):
    """File contents are not in a supported format (depth, channels, codec)."""


class DomainError(LowlightForgeError, ValueError):
    """Numeric values fall outside the documented domain (e.g. outside [0, 1])."""


class ContractError(LowlightForgeError, ValueError):
    """Arguments violate a function precondition (shape, size, pairing)."""


class ConfigurationError(LowlightForgeError, ValueError):
    """A configuration field holds an invalid value."""
