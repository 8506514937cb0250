"""Shared exception types."""

from __future__ import annotations


class ParameterError(ValueError):
    """A caller-supplied parameter is out of range or inconsistent."""


class SizeError(ParameterError):
    """An instance is too large for the requested exhaustive computation."""


class FormatError(ValueError):
    """A file does not match the expected on-disk format."""


class ConstructionError(RuntimeError):
    """A randomized construction failed to verify within its retry budget."""
