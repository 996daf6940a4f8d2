"""Verification engine for four-dimensional coupled Painleve III systems."""

__version__ = "0.1.0"
