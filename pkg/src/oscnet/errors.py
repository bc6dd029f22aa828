"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class OscnetError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(OscnetError, ValueError):
    """Bad configuration file, unknown key or missing path."""

    exit_code = 1


class DataError(OscnetError, ValueError):
    """Input data is malformed or inconsistent."""

    exit_code = 2


class NumericalError(OscnetError, ArithmeticError):
    """A numerical kernel failed (e.g. a precision matrix is not positive definite)."""

    exit_code = 3
