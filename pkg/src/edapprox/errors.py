class EdApproxError(Exception):
    """Base class for all library errors."""


class InvalidInputError(EdApproxError, ValueError):
    """Malformed or inconsistent input (CLI exit code 2)."""


class DependencyError(EdApproxError):
    """A level or stage needed by a computation has not been built."""


class ConfigError(EdApproxError):
    """Bad configuration or numeric range overflow (CLI exit code 3)."""
