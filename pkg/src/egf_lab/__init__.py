"""Numerical laboratory for extrinsic geometric flows on codimension-one foliations.

The library works in the principal frame of the leaves: a point of a leaf is
described by its principal curvature spectrum, a flow by the coefficient
functions of the deformation tensor, and one-dimensional geometry by sampled
profiles along an integral curve of the unit normal.
"""

__version__ = "0.1.0"
