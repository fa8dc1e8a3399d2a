"""
Scenario Runner
Executes one configured command and writes its CSV, SVG and summary artifacts
"""

import math
import time
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from rich import box
from rich.console import Console
from rich.table import Table

from config.manager import ScenarioConfig, render_config
from core.dynamics import IntegrationOptions, TimeSeries, integrate, steady_state
from core.effective import (
    anharmonicity_scan, benchmarks, effective_hamiltonian_shifts, effective_rates, error_estimate,
    rate_model,
)
from core.model import SystemParams, compile_model, initial_state
from experiments import plots, writers
from tuning.optimizer import OptResult, optimize_frequencies
from tuning.sweep import grid_scan, grid_scan_2d
from utils.errors import (
    ConfigError, DegenerateInputError, DomainError, InvalidDimensionError, NumericalFailureError,
    ErrorSeverity, OptimizationFailureError, SingularityError, get_error_tracker, handle_error,
)
from utils.logger import get_log_stats, get_logger
from utils.system import default_jobs, describe_system, process_memory_mb

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

INPUT_ERRORS = (ConfigError, DegenerateInputError, DomainError, InvalidDimensionError, SingularityError)
RUN_ERRORS = (NumericalFailureError, OptimizationFailureError)


@dataclass
class RunArtifacts:
    csv_paths: List[Path] = field(default_factory=list)
    plot_paths: List[Path] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    summary_path: Optional[Path] = None
    exit_code: int = EXIT_OK


class ScenarioRunner:
    """Runs a single ScenarioConfig into its output directory"""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.out = Path(config.output_dir)
        self.jobs = config.jobs or default_jobs()
        self.artifacts = RunArtifacts()
        self.params: SystemParams = config.params

    # helpers

    def _csv(self, path: Path):
        self.artifacts.csv_paths.append(path)

    def _plot(self, fn, *args, name: str, **kwargs):
        if not self.config.svg:
            return
        try:
            self.artifacts.plot_paths.append(fn(*args, self.out / name, **kwargs))
        except (OSError, ValueError) as exc:
            logger.warning(f"Could not render {name}: {exc}")

    def _options(self) -> IntegrationOptions:
        return IntegrationOptions(
            sample_interval=self.config.sample_interval,
            tol=self.config.tol,
            t_max=self.config.t_max,
        )

    def _rho0(self, params: SystemParams):
        return initial_state(self.config.initial_state, params.d_t, params.d_c)

    def _record_series(self, series: TimeSeries):
        self._csv(writers.write_timeseries(self.out / "timeseries.csv", series))
        self._plot(plots.plot_populations, series, name="populations.svg", ghz=self.config.ghz)
        summary = self.artifacts.summary
        if len(series):
            summary["final_PS"] = float(series.fidelity[-1])
            summary["max_trace_error"] = float(np.max(series.trace_error))
            summary["min_eigenvalue"] = float(np.nanmin(series.min_eigenvalue))
            summary["max_purity"] = float(np.max(series.purity))
        summary["accepted_steps"] = series.accepted_steps
        summary["rejected_steps"] = series.rejected_steps

    def _optimize(self, params: SystemParams) -> OptResult:
        result = optimize_frequencies(
            params,
            free=self.config.free,
            t_target=self.config.t_target,
            budget=self.config.budget,
            restarts=self.config.restarts,
            seed=self.config.seed,
            jobs=self.jobs,
            search_horizon=self.config.search_horizon,
        )
        self._csv(writers.write_optimize(self.out / "optimize.csv", self.config.free, result.trace))
        self._plot(plots.plot_optimization, result.incumbents, name="optimize.svg")
        summary = self.artifacts.summary
        summary["optimized_fidelity"] = result.best_fidelity
        summary["start_fidelity"] = result.start_fidelity
        summary["final_fidelity"] = result.final_fidelity
        summary["search_horizon"] = result.search_horizon
        summary["evaluations"] = result.evaluations
        summary["optimized"] = {name: getattr(result.best_params, name) for name in self.config.free}
        return result

    # commands

    def evolve(self):
        model = compile_model(self.params)
        series = integrate(model, self._rho0(self.params), self.config.t_end, self._options())
        self._record_series(series)

    def steady(self):
        model = compile_model(self.params)
        report = steady_state(model, self._rho0(self.params), self._options())
        self._record_series(report.series)
        self.artifacts.summary.update(
            fidelity=report.fidelity,
            converged=report.converged,
            convergence_time=report.convergence_time,
            window_drift=report.window_drift,
            preparation_time=report.preparation_time,
        )

    def rates(self):
        rates = effective_rates(self.params)
        values: Dict[str, Any] = dict(rates.to_dict())
        values.update(effective_hamiltonian_shifts(self.params))
        _, steady, error = rate_model(rates.kappa_plus, rates.kappa_minus, self.params.gamma, 0.0, 0.0)
        values["rate_model_steady"] = steady
        values["rate_model_error"] = error
        values["preparation_time"] = 1.0 / rates.kappa_plus if rates.kappa_plus > 0 else math.inf
        self._csv(writers.write_rates(self.out / "rates.csv", values))
        self.artifacts.summary.update(
            kappa_plus=rates.kappa_plus,
            kappa_minus=rates.kappa_minus,
            kappa_reshuffle=rates.kappa_reshuffle,
            rate_model_steady=steady,
        )

    def benchmarks(self):
        bench = benchmarks(self.params.gamma, self.params.g)
        values: Dict[str, Any] = dict(bench.to_dict())
        if self.params.kappa > 0:
            values["error_at_kappa"] = error_estimate(self.params.kappa, self.params.gamma, self.params.g)
        self._csv(writers.write_rates(self.out / "rates.csv", values))
        self.artifacts.summary.update(kappa_opt=bench.kappa_opt, error_opt=bench.error_opt, tau=bench.tau)

    def spectrum(self):
        rows = anharmonicity_scan(self.params, self.config.spectrum_grid, self.config.sector)
        self._csv(writers.write_spectrum(self.out / "spectrum.csv", rows))
        self._csv(writers.write_spectrum_character(self.out / "spectrum_t1.csv", rows))
        self._plot(plots.plot_spectrum, rows, name="spectrum.svg")
        self.artifacts.summary["sector"] = self.config.sector

    def optimize(self):
        result = self._optimize(self.params)
        best_config = dc_replace(self.config, params=result.best_params, command="steady")
        path = self.out / "optimized.conf"
        path.write_text(render_config(best_config), encoding="utf-8")

    def sweep(self):
        names = self.config.sweep
        options = self._options()
        common = dict(
            t_target=self.config.t_target, jobs=self.jobs, state=self.config.initial_state,
            options=options, optimize_each=self.config.optimize_each, budget=self.config.budget,
            seed=self.config.seed,
        )
        if len(names) == 1:
            points = grid_scan(self.params, names[0], self.config.grid, **common)
        else:
            points = grid_scan_2d(self.params, names[0], self.config.grid, names[1], self.config.grid2,
                                  **common)

        self._csv(writers.write_sweep(self.out / "sweep.csv", names, points))
        if len(names) == 2:
            self._csv(writers.write_preparation(self.out / "preparation.csv", names, points,
                                                cap=self.config.t_target))
            self._plot(plots.plot_sweep_2d, names, self.config.grid, self.config.grid2, points,
                       name="sweep.svg")
        else:
            self._plot(plots.plot_sweep, names[0], points, name="sweep.svg")

        finite = [p.fidelity for p in points if not p.failed]
        self.artifacts.summary.update(
            points=len(points),
            failed_points=len(points) - len(finite),
            best_fidelity=max(finite) if finite else None,
        )

    # driver

    def run(self) -> RunArtifacts:
        started = time.perf_counter()
        self.out.mkdir(parents=True, exist_ok=True)
        summary = self.artifacts.summary
        summary["command"] = self.config.command
        logger.run_event("run_started", {"command": self.config.command, "output": str(self.out)})

        try:
            if self.config.optimize_first and self.config.command in ("evolve", "steady", "sweep"):
                self.params = self._optimize(self.params).best_params
            getattr(self, self.config.command)()
            summary["status"] = "ok"
        except INPUT_ERRORS as exc:
            handle_error("input", exc, ErrorSeverity.HIGH, command=self.config.command)
            summary["status"] = "failed"
            summary["failure"] = str(exc)
            self.artifacts.exit_code = EXIT_CONFIG
        except RUN_ERRORS as exc:
            handle_error("run", exc, ErrorSeverity.CRITICAL, command=self.config.command)
            partial = getattr(exc, "partial_series", None)
            if partial is not None and len(partial):
                self._record_series(partial)
            summary["status"] = "failed"
            summary["failure"] = str(exc)
            self.artifacts.exit_code = EXIT_NUMERICAL

        summary["exit_code"] = self.artifacts.exit_code
        summary["wall_time_s"] = round(time.perf_counter() - started, 3)
        summary["jobs"] = self.jobs
        summary["params"] = self.params.to_dict()
        summary["system"] = describe_system()
        summary["memory_mb"] = round(process_memory_mb(), 1)
        summary["logs"] = get_log_stats()
        errors = get_error_tracker().get_stats()
        summary["errors"] = {
            "total": errors["total_errors"],
            "critical": errors["critical_errors"],
            **{f"by_type.{name}": count for name, count in errors["error_patterns"].items()},
        }

        self.artifacts.summary_path = writers.write_summary(self.out / "summary.txt", summary)
        logger.run_event("run_finished", {"command": self.config.command, "exit_code": self.artifacts.exit_code})
        return self.artifacts


def run(config: ScenarioConfig) -> RunArtifacts:
    return ScenarioRunner(config).run()


def print_summary(artifacts: RunArtifacts, console: Optional[Console] = None):
    console = console or Console()
    table = Table(title="Run Summary", box=box.ROUNDED)
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green")
    for key, value in artifacts.summary.items():
        if isinstance(value, dict):
            continue
        table.add_row(key, f"{value:.6g}" if isinstance(value, float) else str(value))
    console.print(table)
    for path in artifacts.csv_paths + artifacts.plot_paths:
        console.print(f"[dim]wrote {path}[/dim]")
