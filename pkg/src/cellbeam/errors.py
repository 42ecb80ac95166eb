"""Exception types shared across the package."""


class CellbeamError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(CellbeamError):
    """A static configuration value is outside its valid range."""


class ContractViolation(CellbeamError):
    """A caller passed arguments that break an operation's precondition."""


class UsageError(CellbeamError):
    """Operations were called in an invalid order (e.g. step after done)."""
