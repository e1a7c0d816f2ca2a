"""Exception hierarchy shared by the library and the command line."""


class DeclineKitError(Exception):
    """Base class for all library errors."""


class DataError(DeclineKitError):
    """Input data violates a precondition (missing years, bad values)."""


class SchemaError(DeclineKitError):
    """A delimited file lacks required columns or cannot be parsed."""


class ConfigError(DeclineKitError):
    """Run configuration is invalid."""


class InvariantError(DeclineKitError):
    """An internal consistency check failed."""
