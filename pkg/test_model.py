#!/usr/bin/env python3
"""
Tests for parameter validation and model compilation
"""

import math
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))

import numpy as np
import pytest

from core.model import (
    SystemParams, coherence_rates, compile_model, reference_preset, initial_state, resonance_guess,
    with_resonance_guess,
)
from core.qop import bell_basis, destroy, embed, is_hermitian, ket, projector, tensor
from utils.errors import ConfigError


def test_defaults_equal_preset():
    assert SystemParams() == reference_preset(1.0)


def test_resonance_conditions():
    params = reference_preset(2.5)
    assert params.delta2 == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert params.delta_c == pytest.approx(params.delta2 - params.delta1, abs=1e-12)
    assert params.Delta2 == -params.Delta1
    assert params.drive_period == pytest.approx(2 * math.pi / abs(params.delta1 + params.epsilon))


def test_with_resonance_guess_tracks_anharmonicity():
    params = with_resonance_guess(reference_preset(1.0).replace(A=3.0))
    assert params.omega_bar == pytest.approx(resonance_guess(3.0)["omega_bar"])


def test_invalid_params_rejected():
    with pytest.raises(ConfigError):
        SystemParams(kappa=-1.0)
    with pytest.raises(ConfigError):
        SystemParams(d_t=2)
    with pytest.raises(ConfigError):
        SystemParams(d_c=1)
    with pytest.raises(ConfigError):
        SystemParams(g=float("nan"))
    with pytest.raises(ConfigError):
        reference_preset(0.0)


def test_compiled_dimensions_and_hermiticity():
    model = compile_model(SystemParams(d_t=3, d_c=2))
    assert model.dim == 18
    assert is_hermitian(model.H_static)
    for t in (0.0, 0.37, 5.0):
        assert is_hermitian(model.hamiltonian(t), tol=1e-12)


def test_static_diagonal_is_duffing_ladder():
    params = SystemParams(g=0.0, d_t=4, d_c=2)
    model = compile_model(params)
    dims = params.dims
    for k1 in range(4):
        for k2 in range(4):
            for n in range(2):
                index = (k1 * 4 + k2) * 2 + n
                expected = (params.level_energies(0)[k1] + params.level_energies(1)[k2]
                            + n * params.delta_c)
                assert model.H_static[index, index].real == pytest.approx(expected, abs=1e-12)
    assert np.count_nonzero(model.H_static - np.diag(np.diag(model.H_static))) == 0
    assert dims == (4, 4, 2)


def test_singlet_is_dark():
    params = SystemParams(d_t=3, d_c=2)
    model = compile_model(params)
    a = embed(destroy(2), 2, params.dims)
    dark = tensor(bell_basis(3)["S"], ket(2, 0))
    # H_cav |S,0> = 0 so H_static |S,0> = delta_1 |S,0>
    np.testing.assert_allclose(model.H_static @ dark, params.delta1 * dark, atol=1e-12)
    assert np.allclose(a @ dark, 0)


def test_drive_phases():
    params = SystemParams(d_t=3, d_c=2, theta=0.3, delta_Omega=0.8)
    model = compile_model(params)
    amplitudes = [term.amplitude for term in model.drive_terms]
    frequencies = [term.frequency for term in model.drive_terms]
    assert amplitudes[0] == pytest.approx(params.Omega1 / 2)
    assert amplitudes[1] == pytest.approx(-np.exp(-0.3j) * params.Omega2 / 2)
    assert amplitudes[3] == pytest.approx(0.8 * params.Omega2 / 2)
    assert frequencies == [params.Delta1, params.Delta2, params.Delta1, params.Delta2]


def test_lindblad_rates():
    params = SystemParams(d_t=3, d_c=2, gamma=0.01, gamma_phi=0.02, kappa=0.3, nbar=0.1)
    model = compile_model(params)
    # 2 decay per transmon, 1 dephasing per transmon, 2 cavity
    assert len(model.lindblads) == 2 * (2 + 1) + 2
    total = sum(L.conj().T @ L for L in model.lindblads)
    assert is_hermitian(total, tol=1e-12)


def transmon_swap(d_t: int, d_c: int) -> np.ndarray:
    dim = d_t * d_t * d_c
    eye = np.eye(dim).reshape(d_t, d_t, d_c, dim)
    return eye.transpose(1, 0, 2, 3).reshape(dim, dim)


def test_exchange_symmetry_flips_second_drive():
    params = SystemParams(d_t=3, d_c=2)
    swap = transmon_swap(3, 2)
    model = compile_model(params)
    flipped = compile_model(params.replace(Omega2=-params.Omega2))
    np.testing.assert_allclose(swap @ model.H_static @ swap, model.H_static, atol=1e-12)
    for t in (0.0, 0.9, 13.7):
        np.testing.assert_allclose(swap @ model.hamiltonian(t) @ swap, flipped.hamiltonian(t), atol=1e-12)


def test_drive_is_periodic():
    params = SystemParams(d_t=3, d_c=2)
    model = compile_model(params)
    period = 2 * math.pi / abs(params.Delta1)
    assert params.drive_period == pytest.approx(period)
    for t in (0.0, 0.4, 7.3):
        np.testing.assert_allclose(model.drive(t + period), model.drive(t), atol=1e-12)


def test_lindblads_vanish_without_losses():
    params = SystemParams(d_t=3, d_c=2, gamma=0.0, gamma_phi=0.0, kappa=0.0, nbar=0.2)
    for L in compile_model(params).lindblads:
        assert np.linalg.norm(L) == 0.0


def test_compiled_arrays_read_only():
    model = compile_model(SystemParams(d_t=3, d_c=2))
    with pytest.raises(ValueError):
        model.H_static[0, 0] = 1.0


def test_coherence_rates():
    gamma, gamma_phi = coherence_rates(70.0, 95.0, 300e6)
    g_angular = 2 * math.pi * 300e6
    assert gamma == pytest.approx(1 / (70e-6 * g_angular))
    assert gamma_phi == pytest.approx((1 / 95e-6 - 1 / 140e-6) / g_angular)
    # T2 = 2 T1 leaves no pure dephasing
    assert coherence_rates(10.0, 20.0, 1e8)[1] == pytest.approx(0.0, abs=1e-18)


def test_initial_states():
    rho = initial_state("mixture4", 4, 4)
    assert rho.shape == (64, 64)
    assert np.trace(rho).real == pytest.approx(1.0)
    rho_s = initial_state("S", 3, 2)
    expected = projector(tensor(bell_basis(3)["S"], ket(2, 0)))
    np.testing.assert_allclose(rho_s, expected)
    with pytest.raises(ConfigError):
        initial_state("bogus", 3, 2)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print(f"✓ {name}")
