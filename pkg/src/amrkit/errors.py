"""Shared exception types."""


class AmrkitError(Exception):
    """Base class for all data-level errors raised by this package.

    The CLI maps any subclass to exit code 2 (data error), keeping exit
    code 1 for usage errors.
    """


class TooLarge(AmrkitError):
    """An exhaustive-search routine was asked to enumerate beyond its bound."""
