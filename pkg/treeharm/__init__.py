"""treeharm – harmonic analysis and pseudo-differential operators on homogeneous trees."""

from treeharm.errors import TreeHarmError
from treeharm.spectral import torus_grid
from treeharm.tree_core import TreeParams

__version__ = "0.1.0"

__all__ = ["TreeHarmError", "TreeParams", "torus_grid", "__version__"]
