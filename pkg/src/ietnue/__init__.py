"""Exact-arithmetic machinery for non-uniquely ergodic 4-interval exchanges.

Rauzy induction, the block-matrix path construction in the Rauzy class of
(4321), positive SL2 decompositions, projective cone geometry, and a
Frostman-measure harness for nested simplex families.
"""

from .iet import IntervalExchange, OrbitStats, Permutation, apply_iet, orbit_frequencies
from .linalg import VisitationMatrix
from .rauzy import RauzyGraph, RauzyUndefined, cylinder, path_matrix, rauzy_class, rauzy_step
from .sl2 import PositiveSL2, SL2Decomposition, decompose, enumerate_balanced, is_balanced

__all__ = [
    "IntervalExchange",
    "OrbitStats",
    "Permutation",
    "PositiveSL2",
    "RauzyGraph",
    "RauzyUndefined",
    "SL2Decomposition",
    "VisitationMatrix",
    "apply_iet",
    "cylinder",
    "decompose",
    "enumerate_balanced",
    "is_balanced",
    "orbit_frequencies",
    "path_matrix",
    "rauzy_class",
    "rauzy_step",
]

__version__ = "0.1.0"
