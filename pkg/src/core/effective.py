"""
Effective Rates
Two-photon drive, cavity-engineered decay and loss rates, rate-equation
benchmarks and dressed-state spectra of the static Hamiltonian
"""

import math
from dataclasses import dataclass, asdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigh

from core.model import SystemParams, compile_model, with_resonance_guess
from core.qop import ComplexMatrix, StateVector, bell_basis, ket, tensor
from utils.errors import DegenerateInputError, DomainError, SingularityError

SQRT2 = math.sqrt(2.0)
SINGULAR_TOL = 1e-12
T1_OVERLAP_THRESHOLD = 0.25


@dataclass(frozen=True)
class EffectiveRates:
    omega_eff: float
    g_eff_S0: complex
    g_eff_T1: complex
    kappa_plus: float
    kappa_minus: float
    kappa_reshuffle: float
    # on-resonance shortcuts; their prefactors disagree with the general formulas by 2-4x
    kappa_plus_approx: float = 0.0
    kappa_minus_approx: float = 0.0
    # complex detunings delta_j - i j gamma/2 and delta_c - i kappa/2
    delta1_tilde: complex = 0j
    delta2_tilde: complex = 0j
    deltac_tilde: complex = 0j
    # detunings renormalized by the resonator coupling inside each subspace
    delta2_eff_S0: complex = 0j
    delta1c_eff_S0: complex = 0j
    delta2_eff_T1: complex = 0j
    delta1c_eff_T1: complex = 0j

    @property
    def delta_1c_tilde(self) -> complex:
        return self.delta1_tilde + self.deltac_tilde

    def to_dict(self) -> Dict[str, Union[float, complex]]:
        out = asdict(self)
        out["delta_1c_tilde"] = self.delta_1c_tilde
        return out


@dataclass(frozen=True)
class Benchmarks:
    kappa_opt: float
    error_opt: float
    tau: float
    steady_fidelity: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _resonance_denominators(A: float, delta2: float, epsilon: float) -> Dict[str, float]:
    return {
        "epsilon": epsilon,
        "delta2+epsilon": delta2 + epsilon,
        "2A+epsilon": 2.0 * A + epsilon,
        "2A+delta2+epsilon": 2.0 * A + delta2 + epsilon,
    }


def _check_denominators(A: float, delta2: float, epsilon: float) -> Dict[str, float]:
    denominators = _resonance_denominators(A, delta2, epsilon)
    for name, value in denominators.items():
        if abs(value) < SINGULAR_TOL:
            raise SingularityError(f"two-photon drive is resonant: {name} = 0")
    return denominators


def omega_eff(Omega1: float, Omega2: float, A: float, delta2: float, epsilon: float) -> float:
    """Effective two-photon Rabi frequency of the |0> <-> |2> transition.

    (Omega1 Omega2 / 2 sqrt2) [1/eps + 1/(delta2+eps) - 1/(2A+eps) - 1/(2A+delta2+eps)]
    """
    d = _check_denominators(A, delta2, epsilon)
    if A == 0:
        return 0.0
    bracket = (1.0 / d["epsilon"] + 1.0 / d["delta2+epsilon"]
               - 1.0 / d["2A+epsilon"] - 1.0 / d["2A+delta2+epsilon"])
    return Omega1 * Omega2 / (2.0 * SQRT2) * bracket


def omega_eff_combined(Omega1: float, Omega2: float, A: float, delta2: float, epsilon: float) -> float:
    """Single-fraction form of :func:`omega_eff`"""
    d = _check_denominators(A, delta2, epsilon)
    numerator = 2.0 * A * (d["delta2+epsilon"] * d["2A+delta2+epsilon"] + d["epsilon"] * d["2A+epsilon"])
    denominator = d["epsilon"] * d["delta2+epsilon"] * d["2A+epsilon"] * d["2A+delta2+epsilon"]
    return Omega1 * Omega2 / (2.0 * SQRT2) * numerator / denominator


def effective_hamiltonian_shifts(params: SystemParams) -> Dict[str, float]:
    """Diagonal drive-induced shifts of the effective two-photon Hamiltonian.

    ``shift_01`` multiplies (|0><0| - |1><1|) and ``shift_12`` multiplies
    (|1><1| - |2><2|) on each transmon.
    """
    A, delta2, eps = params.A, params.delta2, params.epsilon
    d = _check_denominators(A, delta2, eps)
    w1, w2 = params.Omega1 ** 2, params.Omega2 ** 2
    return {
        "shift_01": w1 / (4.0 * d["epsilon"]) - w2 / (4.0 * d["2A+delta2+epsilon"]),
        "shift_12": -w2 / (2.0 * d["delta2+epsilon"]) + w1 / (2.0 * d["2A+epsilon"]),
        "omega_eff": omega_eff(params.Omega1, params.Omega2, A, delta2, eps),
    }


def _renormalized(detuning: complex, coupling_sq: float) -> complex:
    if detuning == 0:
        return complex(math.inf, 0.0)
    return complex(detuning - coupling_sq / detuning)


def effective_rates(params: SystemParams) -> EffectiveRates:
    g = params.g
    kappa = params.kappa
    if g <= 0:
        raise SingularityError("effective couplings need g > 0")

    d1 = params.delta1 - 0.5j * params.gamma
    d2 = params.delta2 - 1.0j * params.gamma
    dc = params.delta_c - 0.5j * kappa

    g_s0 = SQRT2 * g - d2 * (d1 + dc) / (SQRT2 * g)
    g_t1 = 2.0 * g - d2 * (d1 + dc) / (2.0 * g)
    if abs(g_s0) < SINGULAR_TOL:
        raise SingularityError("effective S0 coupling vanishes")
    if abs(g_t1) < SINGULAR_TOL:
        raise SingularityError("effective T1 coupling vanishes")

    w_eff = omega_eff(params.Omega1, params.Omega2, params.A, params.delta2, params.epsilon)

    kappa_plus = kappa * w_eff ** 2 / (2.0 * abs(g_s0) ** 2)
    kappa_minus = kappa * w_eff ** 2 / abs(g_t1) ** 2
    detuning = params.delta_c - params.delta1
    kappa_reshuffle = 2.0 * kappa * g ** 2 / (2.0 * g ** 2 + detuning ** 2 / 2.0 + kappa ** 2 / 4.0)

    return EffectiveRates(
        omega_eff=w_eff,
        g_eff_S0=complex(g_s0),
        g_eff_T1=complex(g_t1),
        kappa_plus=kappa_plus,
        kappa_minus=kappa_minus,
        kappa_reshuffle=kappa_reshuffle,
        kappa_plus_approx=w_eff ** 2 / (2.0 * kappa) if kappa > 0 else math.inf,
        kappa_minus_approx=kappa * w_eff ** 2 / (4.0 * g ** 2),
        delta1_tilde=complex(d1),
        delta2_tilde=complex(d2),
        deltac_tilde=complex(dc),
        delta2_eff_S0=_renormalized(d2, 2.0 * g ** 2),
        delta1c_eff_S0=_renormalized(d1 + dc, 2.0 * g ** 2),
        delta2_eff_T1=_renormalized(d2, 4.0 * g ** 2),
        delta1c_eff_T1=_renormalized(d1 + dc, 4.0 * g ** 2),
    )


def rate_model(kappa_plus: float, kappa_minus: float, gamma_total: float,
               P_S0: float, t: Union[float, np.ndarray]) -> Tuple[Union[float, np.ndarray], float, float]:
    """Singlet rate equation dP_S/dt = k+ (1 - P_S) - (k- + gamma) P_S.

    Returns (P_S(t), steady value, near-unit-fidelity error (gamma + k-)/k+).
    """
    if min(kappa_plus, kappa_minus, gamma_total) < 0:
        raise DomainError("rates must be non-negative")
    total = kappa_plus + kappa_minus + gamma_total
    if total == 0:
        raise DegenerateInputError("all rates vanish; steady state undefined")

    steady = kappa_plus / total
    P_t = steady + (P_S0 - steady) * np.exp(-total * np.asarray(t, dtype=float))
    if np.ndim(P_t) == 0:
        P_t = float(P_t)
    error = (gamma_total + kappa_minus) / kappa_plus if kappa_plus > 0 else math.inf
    return P_t, steady, error


def error_estimate(kappa: float, gamma: float, g: float) -> float:
    """128 gamma/kappa + kappa^2/(2 g^2), valid for Omega_eff = kappa/8"""
    if kappa <= 0 or g <= 0:
        raise DomainError("kappa and g must be positive")
    if gamma < 0:
        raise DomainError("gamma must be non-negative")
    return 128.0 * gamma / kappa + kappa ** 2 / (2.0 * g ** 2)


def benchmarks(gamma: float, g: float) -> Benchmarks:
    if gamma <= 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    if g <= 0:
        raise DomainError(f"g must be positive, got {g}")
    base = (2.0 * gamma * g ** 2) ** (1.0 / 3.0)
    error_opt = 24.0 * (2.0 * gamma / g) ** (2.0 / 3.0)
    return Benchmarks(
        kappa_opt=4.0 * base,
        error_opt=error_opt,
        tau=32.0 / base,
        steady_fidelity=min(1.0, max(0.0, 1.0 - error_opt)),
    )


def _sector_indices(params: SystemParams, sector: int) -> List[int]:
    d_t, _, d_c = params.dims
    capacity = 2 * (d_t - 1) + (d_c - 1)
    if int(sector) != sector or not 0 <= sector <= capacity:
        raise DegenerateInputError(f"excitation sector {sector} outside 0..{capacity}")
    indices = []
    for k1 in range(d_t):
        for k2 in range(d_t):
            for n in range(d_c):
                if k1 + k2 + n == sector:
                    indices.append((k1 * d_t + k2) * d_c + n)
    if not indices:
        raise DegenerateInputError(f"excitation sector {sector} is empty")
    return indices


def sector_block(params: SystemParams, sector: int) -> Tuple[ComplexMatrix, List[int]]:
    """H_static restricted to fixed transmon levels plus photon number"""
    indices = _sector_indices(params, sector)
    H = np.asarray(compile_model(params).H_static)
    return H[np.ix_(indices, indices)], indices


def dressed_spectrum(params: SystemParams, sector: int) -> List[float]:
    block, _ = sector_block(params, sector)
    return [float(x) for x in np.sort(eigh(block, eigvals_only=True))]


def subspace_spectrum(params: SystemParams, states: Sequence[StateVector]) -> List[float]:
    """Eigenvalues of H_static projected onto orthonormal kets"""
    if not states:
        raise DegenerateInputError("no states given")
    V = np.stack([np.asarray(s, dtype=complex) for s in states], axis=1)
    model = compile_model(params)
    if V.shape[0] != model.dim:
        raise DegenerateInputError(f"states have dimension {V.shape[0]}, model has {model.dim}")
    if not np.allclose(V.conj().T @ V, np.eye(V.shape[1]), atol=1e-10):
        raise DegenerateInputError("states are not orthonormal")
    projected = V.conj().T @ np.asarray(model.H_static) @ V
    return [float(x) for x in eigh(projected, eigvals_only=True)]


def labelled_state(params: SystemParams, label: str, photons: int = 0) -> StateVector:
    """Named two-transmon state times resonator Fock state"""
    d_t, _, d_c = params.dims
    return tensor(bell_basis(d_t)[label], ket(d_c, photons))


@dataclass
class SpectrumRow:
    A: float
    eigenvalues: List[float]
    t1_character: List[bool]


def anharmonicity_scan(params: SystemParams, A_values: Sequence[float], sector: int = 3,
                       follow_resonance: bool = False) -> List[SpectrumRow]:
    """Dressed energies of one excitation sector against anharmonicity.

    A branch is flagged when |<T1, 0|v>|^2 exceeds 0.25.
    """
    rows = []
    for A in A_values:
        point = params.replace(A=float(A))
        if follow_resonance:
            point = with_resonance_guess(point)
        block, indices = sector_block(point, sector)
        values, vectors = eigh(block)

        marker = labelled_state(point, "T1", 0)[indices]
        weights = np.abs(marker.conj() @ vectors) ** 2
        rows.append(SpectrumRow(
            A=float(A),
            eigenvalues=[float(v) for v in values],
            t1_character=[bool(w > T1_OVERLAP_THRESHOLD) for w in weights],
        ))
    return rows
