"""Koopman sampling tools version information."""

__version__ = "0.1.0"
