"""Weighted normalized correlation template matching."""

__version__ = "0.1.0"
