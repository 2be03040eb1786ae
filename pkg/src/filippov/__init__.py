"""Analysis of planar piecewise polynomial vector fields split along y=0:
discontinuity-line classification, sliding dynamics, compactification at
infinity, transition-function regularization, hybrid trajectory
integration and structural-stability reporting."""

from .polys import (
    BivariatePolynomial,
    PiecewiseField,
    PolyVectorField,
    piecewise,
    poly,
    vf,
)
from .tolerances import Tolerances, default_tols

__version__ = "0.1.0"

__all__ = [
    "BivariatePolynomial",
    "PiecewiseField",
    "PolyVectorField",
    "Tolerances",
    "default_tols",
    "piecewise",
    "poly",
    "vf",
    "__version__",
]
