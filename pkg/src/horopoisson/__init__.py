"""Desk-scale numerics for the hyperbolic Poisson transform, its tube-domain
Bergman norms, and the associated half-space extension problem."""

from .field import Field, SpectralGrid
from .poisson import Params, TubePoint
from .bergman import BergmanEvaluation, WeightSpec
from .reporting import Report

__all__ = [
    "Field",
    "SpectralGrid",
    "Params",
    "TubePoint",
    "WeightSpec",
    "BergmanEvaluation",
    "Report",
]

__version__ = "0.1.0"
