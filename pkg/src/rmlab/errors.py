"""Package exception types."""
from __future__ import annotations

__all__ = ["RmlabError", "ConfigError", "GuardExceeded"]


class RmlabError(Exception):
    """Base class for rmlab errors."""


class ConfigError(RmlabError):
    """Invalid configuration or CLI input (exit code 1)."""


class GuardExceeded(RmlabError):
    """A resource guard refused an enumeration (exit code 2).

    Raised instead of attempting work whose cost is exponential in a
    parameter that exceeded its configured bound; the message names the
    guard and suggests the sampling alternative where one exists.
    """
