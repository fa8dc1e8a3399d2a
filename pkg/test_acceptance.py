#!/usr/bin/env python3
"""
End-to-end physics checks on the full preset (minutes to hours of CPU).
Enabled with SINGLET_SLOW_TESTS=1.
"""

import os
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

import numpy as np
import pytest
from scipy.optimize import curve_fit

from core.dynamics import IntegrationOptions, integrate, steady_state
from core.effective import effective_rates, omega_eff
from core.model import coherence_rates, compile_model, reference_preset, initial_state
from tuning.optimizer import optimize_frequencies
from tuning.sweep import grid_scan, grid_scan_2d
from utils.system import default_jobs

pytestmark = pytest.mark.skipif(
    os.environ.get("SINGLET_SLOW_TESTS") != "1", reason="set SINGLET_SLOW_TESTS=1 to run"
)

JOBS = default_jobs()
P11, PT, PS = 1, 2, 3


def optimized(A: float, budget: int = 400, **changes):
    base = reference_preset(A).replace(**changes)
    return optimize_frequencies(base, t_target=1000.0, budget=budget, jobs=JOBS)


def steady_fidelity(params):
    model = compile_model(params)
    rho0 = initial_state("mixture4", params.d_t, params.d_c)
    return steady_state(model, rho0, IntegrationOptions(t_max=2000.0))


def populations_at(params, t: float, state: str = "mixture4"):
    model = compile_model(params)
    series = integrate(model, initial_state(state, params.d_t, params.d_c), t,
                       IntegrationOptions(sample_interval=t / 200))
    return series


@pytest.fixture(scope="module")
def reference():
    return optimized(1.0)


def test_reference_preset_reaches_high_fidelity(reference):
    report = steady_fidelity(reference.best_params)
    assert report.fidelity >= 0.94
    assert report.preparation_time is not None and report.preparation_time <= 300.0
    assert reference.best_fidelity >= reference.start_fidelity - 1e-4


def test_large_anharmonicity_slows_reshuffling(reference):
    strong = optimized(4.75).best_params
    late = populations_at(strong, 200.0).populations[-1]
    early = populations_at(reference.best_params, 200.0).populations[-1]
    assert late[PT] + late[P11] >= 2.0 * (early[PT] + early[P11])
    assert steady_fidelity(strong).fidelity < steady_fidelity(reference.best_params).fidelity


@pytest.mark.parametrize("A", [1.5, 2.5, 3.5])
def test_anharmonicity_window(A):
    params = optimized(A, budget=200).best_params
    assert populations_at(params, 1000.0).fidelity[-1] > 0.90


def test_small_anharmonicity_fails():
    params = reference_preset(0.1)
    assert populations_at(params, 1000.0).fidelity[-1] < 0.90


def test_thermal_photons(reference):
    params = reference.best_params
    assert steady_fidelity(params.replace(nbar=0.02)).fidelity > 0.90
    cold = steady_fidelity(params.replace(nbar=0.0)).fidelity
    warm = steady_fidelity(params.replace(nbar=0.1)).fidelity
    assert cold > warm


def test_imperfection_tolerance(reference):
    deviations = [0.9, 1.0, 1.1]
    points = grid_scan_2d(reference.best_params, "delta_A", deviations, "delta_g", deviations,
                          t_target=400.0, jobs=JOBS)
    assert all(not p.failed and p.fidelity > 0.90 for p in points)


def test_frequency_mismatch_best_at_zero(reference):
    values = [-0.2, -0.1, 0.0, 0.1, 0.2]
    points = grid_scan(reference.best_params, "delta_omega", values, t_target=1000.0, jobs=JOBS)
    fidelities = [p.fidelity for p in points]
    assert values[int(np.argmax(fidelities))] == 0.0


def test_resonance_location_with_weak_drive():
    base = reference_preset(1.0).replace(Omega1=1.0 / 30.0, Omega2=1.0 / 30.0, d_t=3, d_c=3)
    offsets = np.linspace(-0.1, 0.1, 11)
    proxy = [
        populations_at(base.replace(omega_bar=base.omega_bar + x), 200.0, state="ground").fidelity[-1]
        for x in offsets
    ]
    assert abs(offsets[int(np.argmax(proxy))]) <= 0.05


def test_weak_drive_rate_matches_kappa_plus():
    base = reference_preset(1.0).replace(d_t=3, d_c=3)
    w = omega_eff(base.Omega1, base.Omega2, base.A, base.delta2, base.epsilon)
    scale = np.sqrt(base.kappa / 20.0 / w)
    params = base.replace(Omega1=base.Omega1 * scale, Omega2=base.Omega2 * scale)
    kappa_plus = effective_rates(params).kappa_plus

    t_end = 3.0 / kappa_plus
    series = populations_at(params, t_end, state="ground")

    def approach(t, p_inf, rate):
        return p_inf * (1.0 - np.exp(-rate * t))

    (_, rate), _ = curve_fit(approach, series.times, series.fidelity, p0=(0.9, kappa_plus))
    assert 0.5 * kappa_plus <= rate <= 2.0 * kappa_plus


def test_three_dimensional_transmon_rates(record_property):
    gamma, gamma_phi = coherence_rates(70.0, 95.0, 300e6)
    result = optimized(1.0, gamma=gamma, gamma_phi=gamma_phi)
    fidelity = steady_fidelity(result.best_params).fidelity
    record_property("transmon3d_steady_fidelity", round(fidelity, 5))
    record_property("transmon3d_evaluations", result.evaluations)
    assert fidelity >= 0.90
    if fidelity < 0.95:
        pytest.xfail(f"achieved steady fidelity {fidelity:.4f} < 0.95 after {result.evaluations} evaluations")


if __name__ == "__main__":
    print("Run with: SINGLET_SLOW_TESTS=1 python -m pytest test_acceptance.py")
