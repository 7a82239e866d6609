"""Shared exception types.

Every module raises one of these instead of bare ValueError/RuntimeError so
callers (and the CLI) can distinguish bad configuration from bad usage from
numerical trouble.
"""

from __future__ import annotations


class GairlabError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(GairlabError, ValueError):
    """A config value is out of range, inconsistent, or unknown."""


class ShapeError(GairlabError, ValueError):
    """An array argument has the wrong shape or dimensionality."""


class UsageError(GairlabError, RuntimeError):
    """An API was called in an invalid order or on an exhausted object."""


class NumericError(GairlabError, ArithmeticError):
    """A computation produced or would produce non-finite values."""


class InsufficientDataError(GairlabError, ValueError):
    """An operation needs more stored samples than are available."""
