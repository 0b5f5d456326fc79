"""Trace-distance-like bounds on two-party quantum correlations.

Submodules: ``core`` (realizations and behaviors), ``distance`` (D-bar and
D-tilde), ``bounds`` (inequality reports), ``extremal`` (saturation analysis
and mixtures), ``search`` (random-functional experiment), ``protocol`` (parity
protocol) and ``cli``.
"""

from .core import Behavior, Correlators, GeneralRealization, TwoQubitRealization, evaluate_behavior
from .distance import DistanceProfile, dbar, distance_profile, dtilde_closed_form, dtilde_maximize
from .errors import NonlocalBoundsError

__all__ = [
    "Behavior",
    "Correlators",
    "DistanceProfile",
    "GeneralRealization",
    "NonlocalBoundsError",
    "TwoQubitRealization",
    "dbar",
    "distance_profile",
    "dtilde_closed_form",
    "dtilde_maximize",
    "evaluate_behavior",
]

__version__ = "0.1.0"
