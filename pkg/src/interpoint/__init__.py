"""Generalized interpoint distances, ball-volume diagnostics, interpoint ECDFs and L2 bounds."""

from .distances import DistanceSpec, MonotoneMap, evaluate, in_ball
from .densities import DensitySpec
from .empirics import Sample, generate, permutation_test
from .errors import InterpointError

__all__ = [
    "DensitySpec",
    "DistanceSpec",
    "InterpointError",
    "MonotoneMap",
    "Sample",
    "evaluate",
    "generate",
    "in_ball",
    "permutation_test",
]
__version__ = "0.1.0"
