"""
Master Equation Dynamics
Lindblad right-hand side, vectorized Liouvillian, adaptive Dormand-Prince
propagation and drive-period-averaged steady states
"""

import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import expm, solve, LinAlgError

from core.model import ModelSpec
from core.qop import ComplexMatrix, bell_basis, LOWER_LABELS
from utils.errors import (
    DegenerateInputError, InvalidDimensionError, NumericalFailureError, PositivityError,
)
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass
class IntegrationOptions:
    sample_interval: float = 1.0
    atol: float = 1e-9
    rtol: float = 1e-8
    # None means one tenth of the drive period
    max_step: Optional[float] = None
    min_step: float = 1e-12
    trace_tol: float = 1e-6
    positivity_floor: float = -1e-5
    check_positivity: bool = True
    # steady-state detection
    tol: float = 1e-5
    t_max: float = 2000.0
    min_time: float = 0.0
    samples_per_window: int = 8
    window: float = 10.0
    fidelity_threshold: float = 0.9


@dataclass
class TimeSeries:
    times: np.ndarray
    populations: np.ndarray      # columns P_00, P_11, P_T, P_S
    photon_number: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    purity: np.ndarray
    final_state: Optional[ComplexMatrix] = None
    accepted_steps: int = 0
    rejected_steps: int = 0

    @property
    def fidelity(self) -> np.ndarray:
        return self.populations[:, 3]

    def __len__(self) -> int:
        return len(self.times)


@dataclass
class SteadyReport:
    fidelity: float
    converged: bool
    convergence_time: float
    window_drift: float
    window_populations: np.ndarray = field(default_factory=lambda: np.zeros(4))
    preparation_time: Optional[float] = None
    series: Optional[TimeSeries] = None


def _check_state(model: ModelSpec, rho: ComplexMatrix):
    if rho.ndim != 2 or rho.shape != (model.dim, model.dim):
        raise InvalidDimensionError(
            f"density matrix shape {rho.shape} does not match model dimension {model.dim}"
        )


class LindbladRHS:
    """Precomputed pieces of drho/dt = i[rho, H(t)] + sum_k D[L_k] rho"""

    def __init__(self, model: ModelSpec):
        self.model = model
        dim = model.dim

        jumps = [L for L in model.lindblads if np.any(L != 0)]
        if jumps:
            self.jumps = np.stack(jumps)
            self.jumps_dag = np.conj(np.transpose(self.jumps, (0, 2, 1)))
            decay = np.einsum("kji,kjl->il", np.conj(self.jumps), self.jumps)
        else:
            self.jumps = None
            self.jumps_dag = None
            decay = np.zeros((dim, dim), dtype=complex)

        # H - iK/2 folds the anticommutator into one non-Hermitian product
        self.static = np.asarray(model.H_static) - 0.5j * decay

        groups: Dict[float, np.ndarray] = {}
        for term in model.drive_terms:
            if term.amplitude == 0:
                continue
            groups.setdefault(term.frequency, np.zeros((dim, dim), dtype=complex))
            groups[term.frequency] = groups[term.frequency] + term.amplitude * np.asarray(term.operator)
        self.drive_frequencies = np.array(list(groups.keys()), dtype=float)
        self.drive_ops = np.stack(list(groups.values())) if groups else None

    def effective_hamiltonian(self, t: float) -> np.ndarray:
        if self.drive_ops is None:
            return self.static
        phases = np.exp(1j * self.drive_frequencies * t)
        half = np.tensordot(phases, self.drive_ops, axes=1)
        return self.static + half + half.conj().T

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        h_eff = self.effective_hamiltonian(t)
        out = -1j * (h_eff @ rho - rho @ h_eff.conj().T)
        if self.jumps is not None:
            out += (self.jumps @ rho @ self.jumps_dag).sum(axis=0)
        return out


def lindblad_rhs(model: ModelSpec, rho: ComplexMatrix, t: float) -> ComplexMatrix:
    """i[rho, H(t)] + sum_k (L rho L^dag - 1/2 {L^dag L, rho})"""
    _check_state(model, rho)
    return LindbladRHS(model)(t, np.asarray(rho, dtype=complex))


def vectorize(rho: ComplexMatrix) -> np.ndarray:
    """Column-stacking vec"""
    return np.asarray(rho).reshape(-1, order="F")


def unvectorize(vec: np.ndarray, dim: int) -> ComplexMatrix:
    return np.asarray(vec).reshape((dim, dim), order="F")


def build_liouvillian(model: ModelSpec, t: float = 0.0) -> ComplexMatrix:
    """Superoperator with vec(rhs) = L vec(rho), column stacking.

    vec(A X B) = (B^T kron A) vec(X).
    """
    dim = model.dim
    eye = np.eye(dim, dtype=complex)
    H = model.hamiltonian(t)

    liouvillian = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for L in model.lindblads:
        if not np.any(L != 0):
            continue
        LdL = L.conj().T @ L
        liouvillian += np.kron(L.conj(), L) - 0.5 * (np.kron(eye, LdL) + np.kron(LdL.T, eye))
    return liouvillian


def propagate_exact(model: ModelSpec, rho0: ComplexMatrix, t: float, t_freeze: float = 0.0) -> ComplexMatrix:
    """exp(L t) vec(rho0) with the drive frozen at ``t_freeze``"""
    _check_state(model, rho0)
    liouvillian = build_liouvillian(model, t_freeze)
    return unvectorize(expm(liouvillian * t) @ vectorize(rho0), model.dim)


def liouvillian_steady_state(model: ModelSpec, t: float = 0.0) -> ComplexMatrix:
    """Kernel of the frozen Liouvillian, normalized to unit trace.

    One row is replaced by the trace functional, which is a left null vector.
    """
    dim = model.dim
    liouvillian = build_liouvillian(model, t)
    system = liouvillian.copy()
    system[0, :] = vectorize(np.eye(dim, dtype=complex))
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    try:
        vec = solve(system, rhs)
    except LinAlgError as exc:
        raise DegenerateInputError(f"Liouvillian kernel is not one-dimensional: {exc}") from exc
    if not np.all(np.isfinite(vec)):
        raise DegenerateInputError("Liouvillian kernel is not one-dimensional")
    rho = unvectorize(vec, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _reduced_transmons(rho: ComplexMatrix, d_t: int, d_c: int) -> np.ndarray:
    dq = d_t * d_t
    if rho.shape != (dq * d_c, dq * d_c):
        raise InvalidDimensionError(
            f"density matrix shape {rho.shape} does not match d_t={d_t}, d_c={d_c}"
        )
    return np.trace(rho.reshape(dq, d_c, dq, d_c), axis1=1, axis2=3)


def _reduced_resonator(rho: ComplexMatrix, d_t: int, d_c: int) -> np.ndarray:
    dq = d_t * d_t
    return np.trace(rho.reshape(dq, d_c, dq, d_c), axis1=0, axis2=2)


_LOWER_CACHE: Dict[int, np.ndarray] = {}


def _lower_states(d_t: int) -> np.ndarray:
    if d_t not in _LOWER_CACHE:
        basis = bell_basis(d_t)
        _LOWER_CACHE[d_t] = np.stack([basis[label] for label in LOWER_LABELS])
    return _LOWER_CACHE[d_t]


def populations(rho: ComplexMatrix, d_t: int, d_c: int) -> Tuple[float, float, float, float]:
    """(P_00, P_11, P_T, P_S) = Tr((|psi><psi| x 1_cav) rho)"""
    reduced = _reduced_transmons(np.asarray(rho), d_t, d_c)
    states = _lower_states(d_t)
    values = np.einsum("ki,ij,kj->k", states.conj(), reduced, states).real
    return tuple(float(v) for v in values)


def photon_number(rho: ComplexMatrix, d_t: int, d_c: int) -> float:
    cavity = _reduced_resonator(np.asarray(rho), d_t, d_c)
    return float(np.real(np.sum(np.arange(d_c) * np.diag(cavity))))


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class DensityMatrixIntegrator:
    """Adaptive Dormand-Prince propagation of one density matrix.

    Owns its state; re-Hermitizes after every accepted step.
    """

    def __init__(self, model: ModelSpec, rho0: ComplexMatrix, options: IntegrationOptions, t0: float = 0.0):
        _check_state(model, rho0)
        self.model = model
        self.options = options
        self.rhs = LindbladRHS(model)
        self.t = float(t0)
        self.rho = np.array(rho0, dtype=complex)
        self.accepted = 0
        self.rejected = 0

        period = model.params.drive_period
        max_step = options.max_step if options.max_step is not None else math.inf
        if math.isfinite(period):
            max_step = min(max_step, 0.1 * period)
        self.max_step = max_step

        self._k1 = self.rhs(self.t, self.rho)
        self.h = self._initial_step()

    def _scale(self, y: np.ndarray, y_new: Optional[np.ndarray] = None) -> np.ndarray:
        mag = np.abs(y) if y_new is None else np.maximum(np.abs(y), np.abs(y_new))
        return self.options.atol + self.options.rtol * mag

    def _initial_step(self) -> float:
        scale = self._scale(self.rho)
        d0 = np.max(np.abs(self.rho) / scale)
        d1 = np.max(np.abs(self._k1) / scale)
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        return float(min(h, self.max_step, 1.0))

    def _step(self, h: float) -> Tuple[np.ndarray, np.ndarray, float]:
        t, y = self.t, self.rho
        stages = [self._k1]
        for i in range(1, 7):
            increment = sum(a * k for a, k in zip(_A[i], stages) if a != 0.0)
            stages.append(self.rhs(t + _C[i] * h, y + h * increment))
        y_new = y + h * sum(b * k for b, k in zip(_B5, stages) if b != 0.0)
        err = h * sum(e * k for e, k in zip(_E, stages) if e != 0.0)
        err_norm = float(np.max(np.abs(err) / self._scale(y, y_new)))
        return y_new, stages[6], err_norm

    def advance_to(self, t_target: float):
        """Integrate until exactly ``t_target``"""
        while self.t < t_target:
            remaining = t_target - self.t
            h = min(self.h, self.max_step)
            clipped = h >= remaining
            if clipped:
                h = remaining

            min_h = self.options.min_step * max(1.0, abs(self.t))
            if h < min_h and not clipped:
                raise NumericalFailureError("step size underflow", t=self.t)

            y_new, k_last, err_norm = self._step(h)
            if not np.isfinite(err_norm):
                self.rejected += 1
                self.h = 0.2 * h
                if self.h < min_h:
                    raise NumericalFailureError("non-finite state in integrator", t=self.t)
                continue

            if err_norm <= 1.0:
                self.t = t_target if clipped else self.t + h
                self.rho = 0.5 * (y_new + y_new.conj().T)
                self._k1 = k_last
                self.accepted += 1
                factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
                # keep the unclipped proposal when a sample point forced a short step
                proposal = h * factor
                self.h = max(self.h, proposal) if clipped else proposal
            else:
                self.rejected += 1
                self.h = h * max(0.2, 0.9 * err_norm ** -0.2)


class _Sampler:
    """Observable and diagnostic recorder"""

    def __init__(self, model: ModelSpec, options: IntegrationOptions):
        self.options = options
        self.d_t, _, self.d_c = model.dims
        self.times: List[float] = []
        self.pops: List[Tuple[float, float, float, float]] = []
        self.nphot: List[float] = []
        self.trace_err: List[float] = []
        self.min_eig: List[float] = []
        self.purity: List[float] = []

    def record(self, t: float, rho: np.ndarray):
        trace_error = abs(np.trace(rho).real - 1.0)
        if trace_error > self.options.trace_tol:
            raise NumericalFailureError(f"trace drift {trace_error:.3e} exceeds {self.options.trace_tol:.1e}", t=t)

        min_eig = float(np.linalg.eigvalsh(rho)[0]) if self.options.check_positivity else float("nan")
        if self.options.check_positivity and min_eig < self.options.positivity_floor:
            raise PositivityError(f"minimum eigenvalue {min_eig:.3e} below {self.options.positivity_floor:.1e}", t=t)

        self.times.append(t)
        self.pops.append(populations(rho, self.d_t, self.d_c))
        self.nphot.append(photon_number(rho, self.d_t, self.d_c))
        self.trace_err.append(trace_error)
        self.min_eig.append(min_eig)
        self.purity.append(float(np.real(np.vdot(rho, rho))))

    def series(self, integrator: DensityMatrixIntegrator) -> TimeSeries:
        return TimeSeries(
            times=np.array(self.times),
            populations=np.array(self.pops).reshape(-1, 4),
            photon_number=np.array(self.nphot),
            trace_error=np.array(self.trace_err),
            min_eigenvalue=np.array(self.min_eig),
            purity=np.array(self.purity),
            final_state=integrator.rho.copy(),
            accepted_steps=integrator.accepted,
            rejected_steps=integrator.rejected,
        )


def _check_initial(rho0: ComplexMatrix):
    if np.max(np.abs(rho0 - rho0.conj().T), initial=0.0) > 1e-9:
        raise InvalidDimensionError("initial density matrix is not Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-9:
        raise InvalidDimensionError("initial density matrix does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho0 + rho0.conj().T))[0] < -1e-9:
        raise InvalidDimensionError("initial density matrix is not positive semidefinite")


def _sample_grid(t0: float, t_end: float, interval: float) -> np.ndarray:
    count = int(math.floor((t_end - t0) / interval + 1e-9))
    grid = t0 + interval * np.arange(1, count + 1)
    if count == 0 or t_end - grid[-1] > 1e-9 * max(1.0, t_end):
        grid = np.append(grid, t_end)
    else:
        grid[-1] = t_end if abs(grid[-1] - t_end) <= 1e-9 * max(1.0, t_end) else grid[-1]
    return grid


def integrate(model: ModelSpec, rho0: ComplexMatrix, t_end: float,
              options: Optional[IntegrationOptions] = None) -> TimeSeries:
    """Propagate rho0 to t_end, sampling every options.sample_interval"""
    options = options or IntegrationOptions()
    rho0 = np.asarray(rho0, dtype=complex)
    _check_state(model, rho0)
    _check_initial(rho0)
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")

    started = time.perf_counter()
    integrator = DensityMatrixIntegrator(model, rho0, options)
    sampler = _Sampler(model, options)
    sampler.record(0.0, integrator.rho)

    try:
        for t_sample in _sample_grid(0.0, t_end, options.sample_interval):
            integrator.advance_to(float(t_sample))
            sampler.record(float(t_sample), integrator.rho)
    except NumericalFailureError as exc:
        exc.partial_series = sampler.series(integrator)
        raise
    finally:
        elapsed = time.perf_counter() - started
        logger.performance_metric("integrate_wall_time", f"{elapsed:.4f}", "s")
        logger.performance_metric("integrate_steps", integrator.accepted, "accepted")
        logger.performance_metric("integrate_rejected", integrator.rejected, "rejected")

    logger.run_event("integration_finished", {
        "t_end": t_end, "steps": integrator.accepted, "final_PS": round(sampler.pops[-1][3], 6)
    })
    return sampler.series(integrator)


def steady_state(model: ModelSpec, rho0: ComplexMatrix,
                 options: Optional[IntegrationOptions] = None) -> SteadyReport:
    """Integrate until drive-period-averaged populations stop changing.

    Windows have length 2 pi/|Delta_1| (options.window when the drive is off or
    the period is infinite). Not converging by t_max is reported, not raised.
    """
    options = options or IntegrationOptions()
    rho0 = np.asarray(rho0, dtype=complex)
    _check_state(model, rho0)
    _check_initial(rho0)

    period = model.params.drive_period
    window = period if (model.params.drives_on and math.isfinite(period)) else options.window
    window = min(window, options.t_max)
    spw = max(2, int(options.samples_per_window))

    integrator = DensityMatrixIntegrator(model, rho0, options)
    sampler = _Sampler(model, options)
    sampler.record(0.0, integrator.rho)

    # window averages are compared only with each other, never with the t=0 sample
    previous: Optional[np.ndarray] = None
    settled_at: Optional[float] = None
    drift = math.inf
    converged = False
    window_avg = np.array(sampler.pops[0])
    window_end = 0.0
    started = time.perf_counter()

    while window_end < options.t_max - 1e-12:
        window_start = window_end
        window_end = min(window_start + window, options.t_max)
        points = window_start + (window_end - window_start) * np.arange(1, spw + 1) / spw
        first = len(sampler.times)
        try:
            for t_sample in points:
                integrator.advance_to(float(t_sample))
                sampler.record(float(t_sample), integrator.rho)
        except NumericalFailureError as exc:
            exc.partial_series = sampler.series(integrator)
            raise

        if window_end - window_start < window * (1 - 1e-9):
            # a short final window is averaged together with the tail of the previous one
            times = np.array(sampler.times)
            mask = times > window_end - window + 1e-12
            window_avg = np.array(sampler.pops)[mask].mean(axis=0)
        else:
            window_avg = np.array(sampler.pops[first:]).mean(axis=0)

        if previous is not None:
            drift = float(np.max(np.abs(window_avg - previous)))
        previous = window_avg
        if drift < options.tol:
            if settled_at is None:
                settled_at = window_end
            if window_end >= options.min_time:
                converged = True
                break
        else:
            settled_at = None

    elapsed = time.perf_counter() - started
    logger.performance_metric("steady_state_wall_time", f"{elapsed:.4f}", "s")

    series = sampler.series(integrator)
    reached = np.nonzero(series.fidelity >= options.fidelity_threshold)[0]
    prep_time = float(series.times[reached[0]]) if len(reached) else None

    report = SteadyReport(
        fidelity=float(window_avg[3]),
        converged=converged,
        convergence_time=float(settled_at) if converged else math.inf,
        window_drift=drift,
        window_populations=np.asarray(window_avg),
        preparation_time=prep_time,
        series=series,
    )
    logger.run_event("steady_state", {
        "fidelity": round(report.fidelity, 6), "converged": converged, "t": round(window_end, 3)
    })
    return report
