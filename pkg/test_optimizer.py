#!/usr/bin/env python3
"""
Tests for frequency optimization and parameter sweeps
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

import numpy as np
import pytest

from core.dynamics import IntegrationOptions, steady_state
from core.model import SystemParams, compile_model, initial_state, resonance_guess
from tuning.optimizer import FidelityObjective, optimize_frequencies
from tuning.sweep import apply_point, grid_scan, grid_scan_2d
from utils.errors import ConfigError, DomainError, NumericalFailureError, OptimizationFailureError


def quadratic(center):
    def objective(params: SystemParams) -> float:
        return -((params.omega_bar - center[0]) ** 2 + (params.delta_c - center[1]) ** 2)
    return objective


def test_recovers_quadratic_optimum():
    base = SystemParams()
    center = (base.omega_bar + 0.03, base.delta_c - 0.02)
    result = optimize_frequencies(base, free=("omega_bar", "delta_c"), budget=200, restarts=2,
                                  objective=quadratic(center))
    assert result.evaluations <= 200
    assert abs(result.best_params.omega_bar - center[0]) <= 1e-6
    assert abs(result.best_params.delta_c - center[1]) <= 1e-6


def test_best_matches_trace_and_incumbents_monotone():
    base = SystemParams()
    center = (base.omega_bar - 0.04, base.delta_c + 0.01)
    result = optimize_frequencies(base, free=("omega_bar", "delta_c"), budget=120,
                                  objective=quadratic(center))
    finite = [value for _, value in result.trace if np.isfinite(value)]
    assert abs(result.best_fidelity - max(finite)) <= 1e-12
    incumbents = result.incumbents
    assert all(b >= a for a, b in zip(incumbents, incumbents[1:]))
    assert result.start_fidelity == result.trace[0][1]


def test_fixed_seed_is_deterministic():
    base = SystemParams()
    center = (base.omega_bar + 0.01, base.delta_c + 0.01)
    kwargs = dict(free=("omega_bar", "delta_c"), budget=80, seed=7, objective=quadratic(center))
    first = optimize_frequencies(base, jobs=2, **kwargs)
    second = optimize_frequencies(base, jobs=1, **kwargs)
    assert first.trace == second.trace


def test_budget_is_enforced_exactly():
    calls = []

    def objective(params: SystemParams) -> float:
        calls.append(params.epsilon)
        return float(np.sin(7.0 * params.epsilon) + 0.1 * np.cos(31.0 * params.epsilon))

    result = optimize_frequencies(SystemParams(), free=("epsilon",), budget=60, objective=objective)
    assert len(calls) == result.evaluations <= 60


def test_rejects_bad_arguments():
    with pytest.raises(ConfigError):
        optimize_frequencies(SystemParams(), free=("kappa",), objective=quadratic((0, 0)))
    with pytest.raises(DomainError):
        optimize_frequencies(SystemParams(), budget=10, objective=quadratic((0, 0)))


def test_failure_without_finite_values():
    def broken(params: SystemParams) -> float:
        raise NumericalFailureError("diverged")

    with pytest.raises(OptimizationFailureError):
        optimize_frequencies(SystemParams(), free=("epsilon",), budget=50, objective=broken)


def test_restarts_share_whole_budget():
    calls = []

    def drifting(params: SystemParams) -> float:
        calls.append(params.epsilon)
        return float(len(calls))

    result = optimize_frequencies(SystemParams(), free=("epsilon",), budget=100, restarts=4,
                                  objective=drifting)
    assert len(calls) == result.evaluations == 100


def test_restart_count_capped_by_budget():
    result = optimize_frequencies(SystemParams(), free=("omega_bar", "delta_c"), budget=60, restarts=50,
                                  objective=quadratic((0.0, 0.0)))
    assert result.evaluations <= 60


def test_negative_seed_rejected():
    with pytest.raises(ConfigError):
        optimize_frequencies(SystemParams(), budget=50, seed=-1, objective=quadratic((0, 0)))


def test_short_search_then_full_length_score():
    base = SystemParams(d_t=3, d_c=2)
    result = optimize_frequencies(base, free=("epsilon",), t_target=20.0, search_horizon=10.0,
                                  budget=50, restarts=1)
    assert result.search_horizon == 10.0
    assert result.best_fidelity >= result.start_fidelity
    assert 0.0 <= result.best_fidelity <= 1 + 1e-6
    assert result.final_fidelity == FidelityObjective(t_target=20.0)(result.best_params)


def test_custom_objective_has_no_rescoring():
    base = SystemParams()
    result = optimize_frequencies(base, free=("omega_bar", "delta_c"), budget=50,
                                  objective=quadratic((base.omega_bar, base.delta_c)))
    assert result.final_fidelity == result.best_fidelity


def test_apply_point_rederives_resonance_for_A():
    params = apply_point(SystemParams(), ("A",), (2.0,))
    assert params.A == 2.0
    assert params.omega_bar == pytest.approx(resonance_guess(2.0)["omega_bar"])
    assert apply_point(SystemParams(), ("d_c",), (3.0,)).d_c == 3


def test_single_point_scan_matches_direct_call():
    base = SystemParams(d_t=3, d_c=2)
    options = IntegrationOptions()
    points = grid_scan(base, "delta_omega", [0.0], t_target=30.0, options=options)
    assert len(points) == 1

    direct_options = IntegrationOptions(t_max=30.0)
    report = steady_state(compile_model(base), initial_state("mixture4", 3, 2), direct_options)
    assert points[0].fidelity == report.fidelity
    assert points[0].converged == report.converged


def test_scan_keeps_order_and_records_failures():
    base = SystemParams(d_t=3, d_c=2)
    values = [0.3, -1.0, 0.1]
    points = grid_scan(base, "kappa", values, t_target=5.0, jobs=2)
    assert [p.value for p in points] == values
    assert points[1].failed
    assert not points[0].failed and not points[2].failed


def test_two_parameter_scan_is_row_major():
    base = SystemParams(d_t=3, d_c=2)
    points = grid_scan_2d(base, "delta_A", [0.9, 1.1], "delta_g", [0.95, 1.0, 1.05], t_target=5.0)
    assert [p.values for p in points] == [
        (0.9, 0.95), (0.9, 1.0), (0.9, 1.05), (1.1, 0.95), (1.1, 1.0), (1.1, 1.05),
    ]


def test_empty_grid_rejected():
    with pytest.raises(ConfigError):
        grid_scan(SystemParams(), "kappa", [])


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"✓ {name}")
