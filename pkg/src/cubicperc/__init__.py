"""Random-site percolation thresholds on the simple cubic lattice for
neighbourhoods built from the first three coordination shells."""

__version__ = "0.1.0"

from .neighborhood import NeighborhoodSpec, shell, combine, half_stencil, by_name, CANONICAL_NAMES
from .lattice import LatticeGeometry, generate_field, threshold_field
from .labeling import label, spanning_only
from .experiment import (
    SweepPlan,
    PercolationCurve,
    ThresholdEstimate,
    CrossingError,
    NoCrossingError,
    AmbiguousCrossingError,
    run_sweep,
    find_crossing,
    estimate_threshold,
)
from .fitting import ThresholdPoint, PowerLawFit, fit_power_law

__all__ = [
    "NeighborhoodSpec", "shell", "combine", "half_stencil", "by_name", "CANONICAL_NAMES",
    "LatticeGeometry", "generate_field", "threshold_field",
    "label", "spanning_only",
    "SweepPlan", "PercolationCurve", "ThresholdEstimate",
    "CrossingError", "NoCrossingError", "AmbiguousCrossingError",
    "run_sweep", "find_crossing", "estimate_threshold",
    "ThresholdPoint", "PowerLawFit", "fit_power_law",
]
