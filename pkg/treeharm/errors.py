"""
Exception hierarchy for treeharm.

Every failure the library reports on purpose is a TreeHarmError subclass, so
the CLI can map the whole family onto its exit-code contract in one place.
"""

from __future__ import annotations


class TreeHarmError(Exception):
    """Base class for all library errors."""


class InvalidWordError(TreeHarmError):
    """A vertex word contains a letter outside its allowed range."""


class InsufficientDepthError(TreeHarmError):
    """A boundary cylinder is shallower than the vertex it is paired with."""


class PoleProximityError(TreeHarmError):
    """The c-function was evaluated too close to its pole set (τ/2)ℤ."""


class InvalidGridError(TreeHarmError):
    """Torus grid with an odd or too small number of nodes."""


class InvalidParameterError(TreeHarmError):
    """A numeric parameter is outside its admissible range."""


class SymbolDomainError(TreeHarmError):
    """A symbol failed to evaluate (or returned non-finite values) inside its strip."""


class StripTooNarrowError(TreeHarmError):
    """A symbol's holomorphy strip does not reach the contour required by p."""


class InvalidInputError(TreeHarmError):
    """Matrix or function input that cannot be processed (non-finite, wrong shape)."""


class ConfigError(TreeHarmError):
    """Run configuration could not be parsed or validated."""
