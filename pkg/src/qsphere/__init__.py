"""Symbolic and numerical checks for quantum 3-spheres glued from two quantum solid tori."""
from . import crossed, isomap, ktheory, ncpoly, repn

__version__ = "0.1.0"

__all__ = ["crossed", "isomap", "ktheory", "ncpoly", "repn", "__version__"]
