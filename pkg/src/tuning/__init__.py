"""
Tuning Module
Frequency optimization and parameter sweeps
"""

from .optimizer import OptResult, FidelityObjective, optimize_frequencies
from .sweep import ScanPoint, grid_scan, grid_scan_2d, apply_point

__all__ = [
    "OptResult",
    "FidelityObjective",
    "optimize_frequencies",
    "ScanPoint",
    "grid_scan",
    "grid_scan_2d",
    "apply_point",
]
