"""Iterate nonexpansive operators and diagnose cosmic convergence of ``T^n x / |T^n x|``."""
from .cones import PolyhedralCone2D, PolyhedronH
from .errors import CosmicError
from .operators import Operator
from .orbit import (alternating_projections, classify_1d, classify_trichotomy, detect_cosmic_limit, estimate_v,
                    iterate)
from .vecgeo import CosmicPoint, direction_of, poincare_distance

__version__ = "0.1.0"

__all__ = [
    "CosmicError", "CosmicPoint", "Operator", "PolyhedralCone2D", "PolyhedronH",
    "alternating_projections", "classify_1d", "classify_trichotomy", "detect_cosmic_limit",
    "direction_of", "estimate_v", "iterate", "poincare_distance",
]
