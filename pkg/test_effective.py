#!/usr/bin/env python3
"""
Tests for the analytic rate layer and dressed spectra
"""

import math
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

import numpy as np
import pytest

from core.effective import (
    anharmonicity_scan, benchmarks, dressed_spectrum, effective_hamiltonian_shifts, effective_rates,
    error_estimate, labelled_state, omega_eff, omega_eff_combined, rate_model, subspace_spectrum,
)
from core.model import SystemParams, compile_model, reference_preset
from utils.errors import DegenerateInputError, DomainError, SingularityError

SQRT2 = math.sqrt(2.0)


def test_omega_eff_vanishes_without_anharmonicity():
    assert omega_eff(0.3, 0.4, 0.0, 1.2, 0.7) == 0.0


def test_omega_eff_single_fraction_identity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        A, delta2, eps = rng.uniform(0.2, 5.0, size=3)
        w1, w2 = rng.uniform(0.05, 1.0, size=2)
        partial = omega_eff(w1, w2, A, delta2, eps)
        combined = omega_eff_combined(w1, w2, A, delta2, eps)
        assert combined == pytest.approx(partial, rel=1e-12)


def test_omega_eff_reference_value():
    # A = delta2 = eps = 1: 1 + 1/2 - 1/3 - 1/4 = 11/12
    assert omega_eff(1.0, 1.0, 1.0, 1.0, 1.0) == pytest.approx(11.0 / 12.0 / (2 * SQRT2), rel=1e-13)


def test_omega_eff_bilinear():
    base = omega_eff(0.2, 0.3, 1.0, SQRT2, 1.0)
    assert omega_eff(0.4, 0.3, 1.0, SQRT2, 1.0) == pytest.approx(2 * base, rel=1e-14)
    assert omega_eff(0.3, 0.2, 1.0, SQRT2, 1.0) == pytest.approx(base, rel=1e-14)


def test_omega_eff_singularities():
    with pytest.raises(SingularityError, match="epsilon"):
        omega_eff(0.3, 0.3, 1.0, 1.0, 0.0)
    with pytest.raises(SingularityError, match="2A\\+delta2\\+epsilon"):
        omega_eff(0.3, 0.3, 1.0, -1.0, -1.0)


def test_g_eff_at_resonance():
    params = reference_preset(1.0).replace(gamma=0.0)
    rates = effective_rates(params)
    assert abs(rates.g_eff_S0 - 0.5j * params.kappa) <= 1e-12
    assert abs(rates.g_eff_T1.real - params.g) <= params.kappa ** 2 / params.g


def test_renormalized_detunings():
    params = reference_preset(1.0).replace(gamma=0.0)
    rates = effective_rates(params)
    # delta2 = sqrt2 g puts |S0> on resonance with the renormalized S-subspace
    assert abs(rates.delta2_eff_S0) <= 1e-12
    assert rates.delta2_eff_T1 == pytest.approx(SQRT2 - 4.0 / SQRT2)
    d1c = rates.delta_1c_tilde
    assert rates.delta1c_eff_S0 == pytest.approx(d1c - 2.0 / d1c)


def test_rates_use_general_formulas():
    params = reference_preset(1.0)
    rates = effective_rates(params)
    w = omega_eff(params.Omega1, params.Omega2, params.A, params.delta2, params.epsilon)
    assert rates.omega_eff == pytest.approx(w)
    assert rates.kappa_plus == pytest.approx(params.kappa * w ** 2 / (2 * abs(rates.g_eff_S0) ** 2))
    assert rates.kappa_minus == pytest.approx(params.kappa * w ** 2 / abs(rates.g_eff_T1) ** 2)
    assert rates.kappa_plus_approx == pytest.approx(w ** 2 / (2 * params.kappa))
    assert min(rates.kappa_plus, rates.kappa_minus, rates.kappa_reshuffle) >= 0


def test_real_couplings_without_losses():
    params = reference_preset(1.0).replace(gamma=0.0, kappa=0.0, delta_c=0.3)
    rates = effective_rates(params)
    assert rates.g_eff_S0.imag == 0.0
    assert rates.g_eff_T1.imag == 0.0


def test_reshuffle_anharmonicity_form():
    # delta_c = delta2 - delta1 gives delta_c - delta1 = -2A
    params = reference_preset(2.0)
    g, kappa, A = params.g, params.kappa, params.A
    expected = 2 * kappa * g ** 2 / (2 * g ** 2 + 2 * A ** 2 + kappa ** 2 / 4)
    assert effective_rates(params).kappa_reshuffle == pytest.approx(expected, rel=1e-12)


def test_reshuffle_on_cavity_resonance():
    params = reference_preset(2.0)
    params = params.replace(delta_c=params.delta1)
    g, kappa = params.g, params.kappa
    expected = 2 * kappa * g ** 2 / (2 * g ** 2 + kappa ** 2 / 4)
    assert effective_rates(params).kappa_reshuffle == pytest.approx(expected, rel=1e-12)


def test_reshuffle_maximized_at_delta1():
    params = reference_preset(1.5)
    grid = params.delta1 + np.linspace(-2.0, 2.0, 81)
    values = [effective_rates(params.replace(delta_c=float(dc))).kappa_reshuffle for dc in grid]
    assert grid[int(np.argmax(values))] == pytest.approx(params.delta1, abs=1e-12)


def test_effective_coupling_singularity():
    # delta2 (delta1 + delta_c) = 2 g^2 cancels the S0 coupling when lossless
    params = reference_preset(1.0).replace(gamma=0.0, kappa=0.0)
    delta1, delta2 = params.delta1, params.delta2
    params = params.replace(delta_c=2.0 * params.g ** 2 / delta2 - delta1)
    with pytest.raises(SingularityError):
        effective_rates(params)


def test_rate_model_limits():
    P, steady, error = rate_model(0.01, 0.0, 0.0, 0.0, 10.0)
    assert steady == 1.0
    assert error == 0.0
    _, steady, _ = rate_model(0.02, 0.015, 0.005, 0.0, 0.0)
    assert steady == pytest.approx(0.5)
    with pytest.raises(DegenerateInputError):
        rate_model(0.0, 0.0, 0.0, 0.0, 1.0)


def test_rate_model_monotone_approach():
    kp, km, gamma = 0.02, 0.001, 0.0002
    times = np.linspace(0.0, 10.0 / (kp + km + gamma), 200)
    P, steady, _ = rate_model(kp, km, gamma, 0.0, times)
    assert np.all(np.diff(P) >= 0)
    assert abs(P[-1] - steady) <= 1e-4 * steady
    P_late, _, _ = rate_model(kp, km, gamma, 0.0, 20.0 / (kp + km + gamma))
    assert abs(P_late - steady) <= 1e-6


def test_rate_model_error_formula():
    g, kappa, gamma = 1.0, 0.3, 1.0 / 5400.0
    w = kappa / 8.0
    kp = w ** 2 / (2 * kappa)
    km = kappa * w ** 2 / (4 * g ** 2)
    _, _, error = rate_model(kp, km, gamma, 0.0, 0.0)
    assert error == pytest.approx(error_estimate(kappa, gamma, g), rel=1e-12)


def test_benchmarks_reference_values():
    bench = benchmarks(1.0 / 5400.0, 1.0)
    assert bench.kappa_opt == pytest.approx(4 * (2 / 5400) ** (1 / 3), rel=1e-14)
    assert bench.kappa_opt == pytest.approx(0.287, abs=5e-4)
    assert bench.tau * bench.kappa_opt == pytest.approx(128.0, rel=1e-14)
    assert 0.0 <= bench.steady_fidelity <= 1.0


def test_kappa_opt_is_stationary():
    gamma, g = 1.0 / 5400.0, 1.0
    kappa = benchmarks(gamma, g).kappa_opt
    h = 1e-5
    slope = (error_estimate(kappa + h, gamma, g) - error_estimate(kappa - h, gamma, g)) / (2 * h)
    assert abs(slope) <= 1e-8


def test_optimized_error_identity():
    rng = np.random.default_rng(5)
    for _ in range(50):
        gamma = 10 ** rng.uniform(-5, -2)
        g = rng.uniform(0.5, 2.0)
        bench = benchmarks(gamma, g)
        assert error_estimate(bench.kappa_opt, gamma, g) == pytest.approx(bench.error_opt, rel=1e-10)


def test_benchmarks_domain():
    with pytest.raises(DomainError):
        benchmarks(0.0, 1.0)
    with pytest.raises(DomainError):
        benchmarks(1e-3, -1.0)


def test_shift_coefficients():
    params = reference_preset(1.0)
    shifts = effective_hamiltonian_shifts(params)
    A, d2, eps = params.A, params.delta2, params.epsilon
    w1, w2 = params.Omega1 ** 2, params.Omega2 ** 2
    assert shifts["shift_01"] == pytest.approx(w1 / (4 * eps) - w2 / (4 * (2 * A + d2 + eps)))
    assert shifts["shift_12"] == pytest.approx(-w2 / (2 * (d2 + eps)) + w1 / (2 * (2 * A + eps)))


def test_singlet_dressed_pair():
    params = reference_preset(1.0).replace(d_t=3, d_c=2)
    states = [labelled_state(params, "S0", 0), labelled_state(params, "S", 1)]
    values = subspace_spectrum(params, states)
    expected = [params.delta2 - SQRT2 * params.g, params.delta2 + SQRT2 * params.g]
    np.testing.assert_allclose(values, expected, atol=1e-10)


def test_triplet_pair_splitting():
    params = reference_preset(1.0).replace(d_t=3, d_c=2)
    params = params.replace(delta_c=params.delta1)
    states = [labelled_state(params, "T", 0), labelled_state(params, "00", 1)]
    H = compile_model(params).H_static
    coupling = abs(states[1].conj() @ H @ states[0])
    values = subspace_spectrum(params, states)
    assert values[1] - values[0] == pytest.approx(2 * coupling, abs=1e-10)
    assert coupling == pytest.approx(SQRT2 * params.g, abs=1e-12)


def test_bare_spectrum_without_coupling():
    params = SystemParams(g=0.0, d_t=3, d_c=2)
    for sector in range(0, 6):
        values = dressed_spectrum(params, sector)
        bare = sorted(
            params.level_energies(0)[k1] + params.level_energies(1)[k2] + n * params.delta_c
            for k1 in range(3) for k2 in range(3) for n in range(2) if k1 + k2 + n == sector
        )
        np.testing.assert_allclose(values, bare, atol=1e-12)


def test_sector_bounds():
    params = SystemParams(d_t=3, d_c=2)
    with pytest.raises(DegenerateInputError):
        dressed_spectrum(params, 6)
    with pytest.raises(DegenerateInputError):
        dressed_spectrum(params, -1)


def test_anharmonicity_scan_is_continuous():
    params = reference_preset(1.0)
    grid = np.linspace(0.5, 4.0, 71)
    rows = anharmonicity_scan(params, grid, sector=3)
    spacing = grid[1] - grid[0]
    for before, after in zip(rows, rows[1:]):
        assert len(before.eigenvalues) == len(after.eigenvalues)
        # energies depend on A at most through 6A for the third level
        assert np.max(np.abs(np.subtract(after.eigenvalues, before.eigenvalues))) <= 6.0 * spacing + 1e-9
    assert any(any(row.t1_character) for row in rows)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"✓ {name}")
