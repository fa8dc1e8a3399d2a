"""
SVG Plots
Static line charts of the CSV data
"""

import math
from pathlib import Path
from typing import Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from core.dynamics import TimeSeries
from core.effective import SpectrumRow
from tuning.sweep import ScanPoint
from utils.logger import get_logger

logger = get_logger(__name__)

POPULATION_LABELS = ("|00>", "|11>", "|T>", "|S>")


def _time_label(ghz: Optional[float]) -> str:
    if ghz:
        # one unit of 1/g in microseconds
        unit_us = 1e6 / (2.0 * math.pi * ghz)
        return f"t [1/g]  (1/g = {unit_us:.3g} us at g/2pi = {ghz / 1e6:.4g} MHz)"
    return "t [1/g]"


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info(f"Figure saved to {path}")
    return path


def plot_populations(series: TimeSeries, path: Path, ghz: Optional[float] = None) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for column, label in enumerate(POPULATION_LABELS):
        ax.plot(series.times, series.populations[:, column], label=label)
    ax.set_xlabel(_time_label(ghz))
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best")
    return _save(fig, path)


def plot_sweep(name: str, points: Sequence[ScanPoint], path: Path) -> Path:
    kept = [p for p in points if not p.failed]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([p.value for p in kept], [p.fidelity for p in kept], marker="o")
    ax.set_xlabel(name)
    ax.set_ylabel("singlet fidelity")
    return _save(fig, path)


def plot_sweep_2d(names: Sequence[str], grid1: Sequence[float], grid2: Sequence[float],
                  points: Sequence[ScanPoint], path: Path) -> Path:
    """Fidelity map, row-major over (grid1, grid2)"""
    values = [[math.nan] * len(grid2) for _ in grid1]
    for index, point in enumerate(points):
        row, col = divmod(index, len(grid2))
        values[row][col] = point.fidelity if point.fidelity is not None else math.nan
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(list(grid2), list(grid1), values, shading="nearest", vmin=0.0, vmax=1.0)
    fig.colorbar(mesh, ax=ax, label="singlet fidelity")
    ax.set_xlabel(names[1])
    ax.set_ylabel(names[0])
    return _save(fig, path)


def plot_spectrum(rows: Sequence[SpectrumRow], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 5))
    width = max(len(row.eigenvalues) for row in rows)
    for branch in range(width):
        xs = [row.A for row in rows if branch < len(row.eigenvalues)]
        ys = [row.eigenvalues[branch] for row in rows if branch < len(row.eigenvalues)]
        ax.plot(xs, ys, color="0.4", linewidth=1)
        marked = [(row.A, row.eigenvalues[branch]) for row in rows
                  if branch < len(row.t1_character) and row.t1_character[branch]]
        if marked:
            ax.scatter(*zip(*marked), color="tab:red", s=8, zorder=3)
    ax.set_xlabel("A [g]")
    ax.set_ylabel("dressed energy [g]")
    return _save(fig, path)


def plot_optimization(incumbents: Sequence[float], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(1, len(incumbents) + 1), incumbents)
    ax.set_xlabel("evaluation")
    ax.set_ylabel("best fidelity")
    return _save(fig, path)
