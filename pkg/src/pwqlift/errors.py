"""Exception hierarchy shared by the library and the command line tool."""


class PwqliftError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(PwqliftError):
    """Malformed user input: bad file, bad dimensions, bad flags."""

    exit_code = 2


class NotCoveredError(PwqliftError):
    """A query point lies outside every stored region."""

    exit_code = 3


class NumericalError(PwqliftError):
    """An LP or downstream computation failed in a way that would make a
    silently returned result untrustworthy."""

    exit_code = 4


class OracleMismatchError(PwqliftError):
    """A compiled evaluator disagreed with the sequential-scan oracle."""

    exit_code = 5
