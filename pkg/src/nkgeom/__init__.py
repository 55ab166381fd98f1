"""Totally geodesic subspaces of naturally reductive homogeneous spaces and their cones."""

from .errors import GeometryError
from .numkernel import DEFAULT_TOL, Subspace, Tolerance

__all__ = ["GeometryError", "DEFAULT_TOL", "Subspace", "Tolerance"]
__version__ = "0.1.0"
