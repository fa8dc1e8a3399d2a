"""
Frequency Optimizer
Multi-start Nelder-Mead search over the free drive and resonator frequencies
"""

import math
import time
from dataclasses import dataclass, field, replace as dc_replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from core.dynamics import IntegrationOptions, steady_state
from core.model import FREQUENCY_FIELDS, SystemParams, compile_model, initial_state
from utils.errors import (
    ConfigError, DomainError, NumericalFailureError, OptimizationFailureError,
)
from utils.logger import get_logger
from utils.workers import parallel_map

logger = get_logger(__name__)

MIN_BUDGET = 50
FREQUENCY_STEP = 0.05
AMPLITUDE_STEP = 0.05
FREQUENCY_JITTER = 0.05
AMPLITUDE_JITTER = 0.02
# objective horizon used while searching; the winner is re-scored at t_target
SEARCH_HORIZON = 200.0

Objective = Callable[[SystemParams], float]
TraceEntry = Tuple[Tuple[float, ...], float]


@dataclass
class OptResult:
    best_params: SystemParams
    best_fidelity: float
    evaluations: int
    trace: List[TraceEntry] = field(default_factory=list)
    start_fidelity: float = float("nan")
    final_fidelity: float = float("nan")
    search_horizon: float = float("nan")
    wall_time: float = 0.0

    @property
    def incumbents(self) -> List[float]:
        """Running best fidelity along the trace"""
        best = -math.inf
        out = []
        for _, value in self.trace:
            if math.isfinite(value) and value > best:
                best = value
            out.append(best)
        return out


class FidelityObjective:
    """Window-averaged singlet fidelity at ``t_target`` from ``state``.

    Picklable so restarts can run in worker processes.
    """

    def __init__(self, t_target: float = 1000.0, state: str = "mixture4",
                 options: Optional[IntegrationOptions] = None):
        self.t_target = float(t_target)
        self.state = state
        base = options or IntegrationOptions(atol=1e-7, rtol=1e-6)
        self.options = dc_replace(base, t_max=self.t_target, min_time=0.5 * self.t_target)

    def __call__(self, params: SystemParams) -> float:
        model = compile_model(params)
        rho0 = initial_state(self.state, params.d_t, params.d_c)
        return steady_state(model, rho0, self.options).fidelity


class _BudgetExhausted(Exception):
    pass


class _Tracked:
    """Maps a vector onto params, negates for minimization and stops at the budget"""

    def __init__(self, base: SystemParams, free: Sequence[str], objective: Objective, budget: int):
        self.base = base
        self.free = list(free)
        self.objective = objective
        self.budget = budget
        self.trace: List[TraceEntry] = []

    def params_at(self, x: Sequence[float]) -> SystemParams:
        return self.base.replace(**{name: float(v) for name, v in zip(self.free, x)})

    def __call__(self, x: np.ndarray) -> float:
        if len(self.trace) >= self.budget:
            raise _BudgetExhausted()
        try:
            value = float(self.objective(self.params_at(x)))
        except (NumericalFailureError, ConfigError, ZeroDivisionError) as exc:
            logger.debug(f"Objective failed at {np.round(x, 6).tolist()}: {exc}")
            value = float("nan")
        self.trace.append((tuple(float(v) for v in x), value))
        return -value if math.isfinite(value) else math.inf


def _simplex(x0: np.ndarray, free: Sequence[str]) -> np.ndarray:
    rows = [x0]
    for i, name in enumerate(free):
        step = AMPLITUDE_STEP if name == "delta_Omega" else FREQUENCY_STEP
        vertex = x0.copy()
        vertex[i] += step
        rows.append(vertex)
    return np.array(rows)


@dataclass
class _Run:
    base: SystemParams
    free: Tuple[str, ...]
    x0: np.ndarray
    budget: int
    objective: Objective


def _nelder_mead(run: _Run) -> List[TraceEntry]:
    tracked = _Tracked(run.base, run.free, run.objective, run.budget)
    try:
        minimize(
            tracked,
            run.x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": _simplex(run.x0, run.free),
                "maxfev": run.budget,
                "xatol": 1e-9,
                "fatol": 1e-12,
            },
        )
    except _BudgetExhausted:
        pass
    return tracked.trace


def _best(trace: Sequence[TraceEntry]) -> Optional[TraceEntry]:
    finite = [entry for entry in trace if math.isfinite(entry[1])]
    if not finite:
        return None
    # first occurrence wins ties
    return max(finite, key=lambda entry: entry[1])


def _final_fidelity(params: SystemParams, t_target: float) -> float:
    try:
        return float(FidelityObjective(t_target)(params))
    except NumericalFailureError as exc:
        logger.warning(f"Full-length evaluation at t={t_target:g} failed: {exc}")
        return float("nan")


def optimize_frequencies(base: SystemParams, free: Sequence[str] = ("omega_bar", "epsilon", "delta_c"),
                         t_target: float = 1000.0, budget: int = 400, restarts: int = 4,
                         seed: int = 0, objective: Optional[Objective] = None,
                         jobs: int = 1, search_horizon: Optional[float] = None) -> OptResult:
    """Maximize the objective (default: singlet fidelity) over ``free``.

    The jittered restarts split the whole budget and run concurrently. The
    default objective integrates to ``search_horizon`` (min(t_target, 200)
    unless given); the winner is then scored once at ``t_target`` into
    ``final_fidelity``. A custom objective is used as is.
    """
    free = tuple(free)
    if not free:
        raise ConfigError("no free parameters given", key="free")
    for name in free:
        if name not in FREQUENCY_FIELDS:
            raise ConfigError(f"{name} cannot be optimized; choose from {FREQUENCY_FIELDS}", key="free")
    if budget < MIN_BUDGET:
        raise DomainError(f"budget must be at least {MIN_BUDGET}, got {budget}")
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}", key="seed")
    restarts = max(1, min(int(restarts), budget // (len(free) + 1)))

    custom = objective is not None
    horizon = float(search_horizon) if search_horizon is not None else min(float(t_target), SEARCH_HORIZON)
    if not horizon > 0:
        raise DomainError(f"search_horizon must be positive, got {horizon}")
    objective = objective or FidelityObjective(horizon)
    rng = np.random.default_rng(int(seed))
    started = time.perf_counter()

    center = np.array([float(getattr(base, name)) for name in free])
    scale = np.array([AMPLITUDE_JITTER if name == "delta_Omega" else FREQUENCY_JITTER for name in free])
    starts = [center]
    for _ in range(restarts - 1):
        starts.append(center + scale * rng.uniform(-1.0, 1.0, size=len(free)))

    per_restart = budget // restarts
    runs = [_Run(base, free, x0, per_restart, objective) for x0 in starts]
    logger.info(f"Optimizing {', '.join(free)}: {restarts} restarts x {per_restart} evaluations"
                + ("" if custom else f" at t={horizon:g}"))

    traces = parallel_map(_nelder_mead, runs, jobs=jobs, kind="thread" if custom else "process")
    trace: List[TraceEntry] = [entry for run_trace in traces for entry in run_trace]

    best = _best(trace)
    if best is None:
        raise OptimizationFailureError(f"no finite objective value in {len(trace)} evaluations")

    best_params = base.replace(**{name: value for name, value in zip(free, best[0])})
    if custom or horizon >= t_target:
        final = best[1]
    else:
        final = _final_fidelity(best_params, t_target)

    start_value = trace[0][1] if trace else float("nan")
    result = OptResult(
        best_params=best_params,
        best_fidelity=best[1],
        evaluations=len(trace),
        trace=trace,
        start_fidelity=start_value,
        final_fidelity=final,
        search_horizon=float("nan") if custom else horizon,
        wall_time=time.perf_counter() - started,
    )
    logger.run_event("optimization_finished", {
        "best": round(result.best_fidelity, 6),
        "start": round(start_value, 6) if math.isfinite(start_value) else None,
        "final": round(final, 6) if math.isfinite(final) else None,
        "evaluations": result.evaluations,
    })
    logger.performance_metric("optimize_wall_time", f"{result.wall_time:.3f}", "s")
    return result
