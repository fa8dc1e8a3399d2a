"""
Core Module
Operators, the two-transmon model, master-equation dynamics and analytic rates
"""

from .model import SystemParams, ModelSpec, compile_model, reference_preset, initial_state
from .dynamics import (
    IntegrationOptions, TimeSeries, SteadyReport, integrate, steady_state, populations,
    lindblad_rhs, build_liouvillian,
)
from .effective import EffectiveRates, Benchmarks, effective_rates, benchmarks, omega_eff

__all__ = [
    "SystemParams",
    "ModelSpec",
    "compile_model",
    "reference_preset",
    "initial_state",
    "IntegrationOptions",
    "TimeSeries",
    "SteadyReport",
    "integrate",
    "steady_state",
    "populations",
    "lindblad_rhs",
    "build_liouvillian",
    "EffectiveRates",
    "Benchmarks",
    "effective_rates",
    "benchmarks",
    "omega_eff",
]
