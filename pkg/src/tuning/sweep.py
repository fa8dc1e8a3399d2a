"""
Parameter Sweeps
Independent steady-state evaluations over one- and two-parameter grids
"""

from dataclasses import dataclass, replace as dc_replace
from itertools import product
from typing import List, Optional, Sequence, Tuple

from core.dynamics import IntegrationOptions, steady_state
from core.model import SystemParams, compile_model, initial_state, param_names, with_resonance_guess
from tuning.optimizer import optimize_frequencies
from utils.errors import ConfigError, ErrorSeverity, SimulationError, handle_error
from utils.logger import get_logger
from utils.workers import parallel_map

logger = get_logger(__name__)

INTEGER_FIELDS = ("d_t", "d_c")


@dataclass
class ScanPoint:
    values: Tuple[float, ...]
    fidelity: Optional[float]
    converged: bool
    preparation_time: Optional[float]

    @property
    def value(self) -> float:
        return self.values[0]

    @property
    def failed(self) -> bool:
        return self.fidelity is None


@dataclass
class _Cell:
    base: SystemParams
    names: Tuple[str, ...]
    values: Tuple[float, ...]
    t_target: float
    state: str
    options: IntegrationOptions
    optimize: bool
    budget: int
    seed: int


def apply_point(base: SystemParams, names: Sequence[str], values: Sequence[float]) -> SystemParams:
    """Set swept parameters; sweeping A re-derives the resonance guess"""
    changes = {}
    for name, value in zip(names, values):
        if name not in param_names():
            raise ConfigError(f"unknown sweep parameter {name!r}", key="sweep")
        changes[name] = int(value) if name in INTEGER_FIELDS else float(value)
    params = base.replace(**changes)
    if "A" in names:
        params = with_resonance_guess(params)
    return params


def _evaluate(cell: _Cell) -> ScanPoint:
    try:
        params = apply_point(cell.base, cell.names, cell.values)
        if cell.optimize:
            params = optimize_frequencies(
                params, t_target=cell.t_target, budget=cell.budget, seed=cell.seed
            ).best_params
        model = compile_model(params)
        rho0 = initial_state(cell.state, params.d_t, params.d_c)
        report = steady_state(model, rho0, cell.options)
        return ScanPoint(cell.values, report.fidelity, report.converged, report.preparation_time)
    except SimulationError as exc:
        handle_error("sweep", exc, ErrorSeverity.MEDIUM,
                     point=dict(zip(cell.names, cell.values)))
        return ScanPoint(cell.values, None, False, None)


def _scan(base: SystemParams, names: Tuple[str, ...], points: Sequence[Tuple[float, ...]],
          t_target: float, jobs: int, state: str, options: Optional[IntegrationOptions],
          optimize_each: bool, budget: int, seed: int) -> List[ScanPoint]:
    if not points:
        raise ConfigError("sweep grid is empty", key="grid")
    options = dc_replace(options or IntegrationOptions(), t_max=float(t_target))
    cells = [
        _Cell(base, names, tuple(float(v) for v in values), float(t_target), state, options,
              optimize_each, budget, seed)
        for values in points
    ]
    logger.info(f"Sweeping {' x '.join(names)} over {len(cells)} points with {jobs} worker(s)")
    results = parallel_map(_evaluate, cells, jobs=jobs, kind="process")
    failed = sum(1 for point in results if point.failed)
    if failed:
        logger.warning(f"{failed} of {len(results)} sweep points failed")
    return results


def grid_scan(base: SystemParams, parameter: str, values: Sequence[float], t_target: float = 1000.0,
              jobs: int = 1, state: str = "mixture4", options: Optional[IntegrationOptions] = None,
              optimize_each: bool = False, budget: int = 200, seed: int = 0) -> List[ScanPoint]:
    return _scan(base, (parameter,), [(v,) for v in values], t_target, jobs, state, options,
                 optimize_each, budget, seed)


def grid_scan_2d(base: SystemParams, parameter1: str, values1: Sequence[float],
                 parameter2: str, values2: Sequence[float], t_target: float = 1000.0,
                 jobs: int = 1, state: str = "mixture4", options: Optional[IntegrationOptions] = None,
                 optimize_each: bool = False, budget: int = 200, seed: int = 0) -> List[ScanPoint]:
    """Row-major over (values1, values2)"""
    if not values1 or not values2:
        raise ConfigError("sweep grid is empty", key="grid")
    return _scan(base, (parameter1, parameter2), list(product(values1, values2)), t_target, jobs,
                 state, options, optimize_each, budget, seed)
