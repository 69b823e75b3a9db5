"""Numerical toolkit for pointwise fractional Laplacians, logarithmic
potentials and polyharmonic ball kernels, with desk-scale certified
quadrature and reproducible reporting."""

from .core import (
    FracOrder,
    GeomConstants,
    Point,
    Polynomial,
    QuadratureSpec,
    ScalarField,
    geom_constants,
    poly_fit,
)

__version__ = "0.1.0"

__all__ = [
    "FracOrder",
    "GeomConstants",
    "Point",
    "Polynomial",
    "QuadratureSpec",
    "ScalarField",
    "geom_constants",
    "poly_fit",
    "__version__",
]
