"""
Two-Transmon Resonator Model
Compiles physical and imperfection parameters into rotating-frame Hamiltonian
pieces and Lindblad operators. All quantities are in units of the coupling g.
"""

import math
import numbers
from dataclasses import dataclass, fields, replace, asdict
from typing import Dict, Any, List, Tuple

import numpy as np

from core.qop import (
    ComplexMatrix, bell_basis, destroy, embed, is_hermitian, ket, number, projector, tensor,
    BELL_LABELS, LOWER_LABELS,
)
from utils.errors import ConfigError
from utils.logger import get_logger

logger = get_logger(__name__)

SQRT2 = math.sqrt(2.0)

# Fields the optimizer and sweeps are allowed to touch besides the physical ones.
FREQUENCY_FIELDS = ("omega_bar", "epsilon", "delta_c", "delta_Omega")


@dataclass(frozen=True)
class SystemParams:
    # coupling
    g: float = 1.0
    delta_g: float = 1.0
    # transmon spectrum
    omega: float = 20.0
    delta_omega: float = 0.0
    A: float = 1.0
    delta_A: float = 1.0
    # drive frame
    omega_bar: float = 20.0 - (1.0 + SQRT2 / 2.0)
    epsilon: float = 1.0
    delta_c: float = SQRT2 - (1.0 + SQRT2 / 2.0)
    # drive fields
    Omega1: float = 1.0 / 3.0
    Omega2: float = 1.0 / 3.0
    delta_Omega: float = 1.0
    theta: float = 0.0
    # dissipation
    kappa: float = 0.3
    gamma: float = 1.0 / 5400.0
    gamma_phi: float = 0.0
    nbar: float = 0.0
    # truncation
    d_t: int = 4
    d_c: int = 4

    def __post_init__(self):
        self.validate()

    def validate(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, numbers.Real):
                raise ConfigError(f"{f.name} must be a number, got {value!r}", key=f.name)
            if not math.isfinite(value):
                raise ConfigError(f"{f.name} must be finite, got {value}", key=f.name)

        for name in ("kappa", "gamma", "gamma_phi", "nbar"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}", key=name)

        if int(self.d_t) != self.d_t or self.d_t not in (3, 4):
            raise ConfigError(f"d_t must be 3 or 4, got {self.d_t}", key="d_t")
        if int(self.d_c) != self.d_c or self.d_c < 2:
            raise ConfigError(f"d_c must be an integer >= 2, got {self.d_c}", key="d_c")

    # Derived detunings are recomputed on access, never stored.
    @property
    def delta1(self) -> float:
        return self.omega - self.omega_bar

    @property
    def delta2(self) -> float:
        return 2.0 * (self.omega - self.omega_bar) - 2.0 * self.A

    @property
    def Delta1(self) -> float:
        return -(self.delta1 + self.epsilon)

    @property
    def Delta2(self) -> float:
        return -self.Delta1

    @property
    def drive_period(self) -> float:
        if abs(self.Delta1) < 1e-12:
            return math.inf
        return 2.0 * math.pi / abs(self.Delta1)

    @property
    def dims(self) -> Tuple[int, int, int]:
        return (int(self.d_t), int(self.d_t), int(self.d_c))

    @property
    def drives_on(self) -> bool:
        return self.Omega1 != 0.0 or self.Omega2 != 0.0

    def transmon_couplings(self) -> Tuple[float, float]:
        return (self.g, self.delta_g * self.g)

    def transmon_anharmonicities(self) -> Tuple[float, float]:
        return (self.A, self.delta_A * self.A)

    def transmon_frequencies(self) -> Tuple[float, float]:
        return (self.omega, self.omega + self.delta_omega)

    def level_energies(self, j: int) -> np.ndarray:
        """Rotating-frame Duffing ladder k(w_j - w_bar) - A_j k(k-1) of transmon j (0 or 1)"""
        k = np.arange(self.d_t, dtype=float)
        w_j = self.transmon_frequencies()[j]
        a_j = self.transmon_anharmonicities()[j]
        return k * (w_j - self.omega_bar) - a_j * k * (k - 1.0)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def param_names() -> List[str]:
    return [f.name for f in fields(SystemParams)]


@dataclass(frozen=True, eq=False)
class DriveTerm:
    operator: ComplexMatrix
    amplitude: complex
    frequency: float


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Compiled model.

    H'(t) = H_static + sum_k (amplitude_k e^{i frequency_k t} operator_k + h.c.)
    """

    H_static: ComplexMatrix
    drive_terms: Tuple[DriveTerm, ...]
    lindblads: Tuple[ComplexMatrix, ...]
    dims: Tuple[int, int, int]
    params: SystemParams

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def drive(self, t: float) -> ComplexMatrix:
        """H'_d(t)"""
        half = np.zeros((self.dim, self.dim), dtype=complex)
        for term in self.drive_terms:
            half += term.amplitude * np.exp(1j * term.frequency * t) * term.operator
        return half + half.conj().T

    def hamiltonian(self, t: float) -> ComplexMatrix:
        return self.H_static + self.drive(t)


def _frozen(matrix: np.ndarray) -> np.ndarray:
    out = np.array(matrix, dtype=complex)
    out.setflags(write=False)
    return out


def compile_model(params: SystemParams) -> ModelSpec:
    """Build H_static, the drive generators and the Lindblad list from ``params``"""
    params.validate()
    dims = params.dims
    d_t, _, d_c = dims

    a = embed(destroy(d_c), 2, dims)
    b = [embed(destroy(d_t), j, dims) for j in (0, 1)]
    g_j = params.transmon_couplings()

    H = params.delta_c * (a.conj().T @ a)
    for j in (0, 1):
        H = H + embed(np.diag(params.level_energies(j)).astype(complex), j, dims)
        H = H + g_j[j] * (a.conj().T @ b[j] + b[j].conj().T @ a)

    if not is_hermitian(H):
        raise ConfigError("static Hamiltonian is not Hermitian")

    half_omega1 = params.Omega1 / 2.0
    half_omega2 = params.Omega2 / 2.0
    # Omega_2 carries opposite phase on the two transmons; theta and delta_Omega model
    # imperfections of the individual wires.
    drive_terms = (
        DriveTerm(_frozen(b[0].conj().T), complex(half_omega1), params.Delta1),
        DriveTerm(_frozen(b[0].conj().T), -np.exp(-1j * params.theta) * half_omega2, params.Delta2),
        DriveTerm(_frozen(b[1].conj().T), complex(half_omega1), params.Delta1),
        DriveTerm(_frozen(b[1].conj().T), complex(params.delta_Omega * half_omega2), params.Delta2),
    )

    lindblads: List[ComplexMatrix] = []
    for j in (0, 1):
        for k in range(1, d_t):
            jump = np.zeros((d_t, d_t), dtype=complex)
            jump[k - 1, k] = 1.0
            lindblads.append(math.sqrt(k * params.gamma) * embed(jump, j, dims))
        lindblads.append(math.sqrt(2.0 * params.gamma_phi) * embed(number(d_t), j, dims))
    lindblads.append(math.sqrt(params.kappa * (params.nbar + 1.0)) * a)
    lindblads.append(math.sqrt(params.kappa * params.nbar) * a.conj().T)

    logger.debug(f"Compiled model dims={dims} drive_period={params.drive_period:.4g}")

    return ModelSpec(
        H_static=_frozen(H),
        drive_terms=drive_terms,
        lindblads=tuple(_frozen(L) for L in lindblads),
        dims=dims,
        params=params,
    )


def resonance_guess(A: float, g: float = 1.0, omega: float = 20.0) -> Dict[str, float]:
    """Frequencies from delta_2 = sqrt(2) g and delta_c = delta_2 - delta_1"""
    delta2 = SQRT2 * g
    delta1 = A + delta2 / 2.0
    return {
        "omega_bar": omega - delta1,
        "delta_c": delta2 - delta1,
    }


def with_resonance_guess(params: SystemParams) -> SystemParams:
    """Re-derive omega_bar and delta_c for the current anharmonicity"""
    return params.replace(**resonance_guess(params.A, params.g, params.omega))


def reference_preset(anharmonicity: float) -> SystemParams:
    """Baseline: Omega = g/3, kappa = 3g/10, gamma = g/5400, omega = 20g, four levels each"""
    if not math.isfinite(anharmonicity) or anharmonicity <= 0:
        raise ConfigError(f"anharmonicity must be positive, got {anharmonicity}", key="A")
    return SystemParams(
        g=1.0,
        omega=20.0,
        A=float(anharmonicity),
        epsilon=1.0,
        Omega1=1.0 / 3.0,
        Omega2=1.0 / 3.0,
        kappa=0.3,
        gamma=1.0 / 5400.0,
        gamma_phi=0.0,
        nbar=0.0,
        d_t=4,
        d_c=4,
        **resonance_guess(anharmonicity, 1.0, 20.0),
    )


def coherence_rates(t1_us: float, t2_us: float, g_hz: float) -> Tuple[float, float]:
    """Convert T1/T2 (microseconds) into (gamma, gamma_phi) in units of g.

    g_hz is g/2pi in Hz. The dephasing channel sqrt(2 gamma_phi) n damps the 0-1
    coherence at gamma_phi, so 1/T2 = gamma/2 + gamma_phi.
    """
    if t1_us <= 0 or t2_us <= 0 or g_hz <= 0:
        raise ConfigError("T1, T2 and g/2pi must be positive")
    g_angular = 2.0 * math.pi * g_hz
    t1 = t1_us * 1e-6
    t2 = t2_us * 1e-6
    gamma = 1.0 / (t1 * g_angular)
    gamma_phi = max(0.0, (1.0 / t2 - 1.0 / (2.0 * t1)) / g_angular)
    return gamma, gamma_phi


def initial_state(name: str, d_t: int, d_c: int) -> ComplexMatrix:
    """Density matrix of a named two-transmon state times resonator vacuum.

    ``mixture4`` is the equal mixture of |00>, |11>, |T>, |S>; ``ground`` is |00>.
    """
    basis = bell_basis(d_t)
    vacuum = projector(ket(d_c, 0))

    if name == "mixture4":
        transmons = sum(projector(basis[label]) for label in LOWER_LABELS) / 4.0
    elif name == "ground":
        transmons = projector(basis["00"])
    elif name in BELL_LABELS:
        transmons = projector(basis[name])
    else:
        raise ConfigError(f"unknown initial state {name!r}; expected mixture4, ground or one of {BELL_LABELS}")

    return tensor(transmons, vacuum)
