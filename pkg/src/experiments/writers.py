"""
Result Writers
CSV tables with 17 significant digits and the key = value run summary
"""

import csv
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

from core.dynamics import TimeSeries
from core.effective import SpectrumRow
from tuning.sweep import ScanPoint

TIMESERIES_HEADER = ("t", "P00", "P11", "PT", "PS", "nphot", "trace_err", "mineig")


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    # numpy scalars
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def write_timeseries(path: Path, series: TimeSeries) -> Path:
    rows = (
        (float(t), *[float(p) for p in pops], float(n), float(err), float(eig))
        for t, pops, n, err, eig in zip(series.times, series.populations, series.photon_number,
                                        series.trace_error, series.min_eigenvalue)
    )
    return write_csv(path, TIMESERIES_HEADER, rows)


def write_sweep(path: Path, names: Sequence[str], points: Sequence[ScanPoint]) -> Path:
    header = (*names, "fidelity", "converged")
    return write_csv(path, header, ((*p.values, p.fidelity, p.converged) for p in points))


def write_preparation(path: Path, names: Sequence[str], points: Sequence[ScanPoint], cap: float) -> Path:
    """Time to reach the fidelity threshold per cell; cells that never reach it get ``cap``"""
    def prep(point: ScanPoint) -> Optional[float]:
        if point.failed:
            return None
        return point.preparation_time if point.preparation_time is not None else float(cap)

    header = (*names, "prep_time")
    return write_csv(path, header, ((*p.values, prep(p)) for p in points))


def write_rates(path: Path, values: Mapping[str, Any]) -> Path:
    """name,value rows; complex entries are split into _re and _im"""
    rows: List[Sequence[Any]] = []
    for name, value in values.items():
        if isinstance(value, complex):
            rows.append((f"{name}_re", value.real))
            rows.append((f"{name}_im", value.imag))
        else:
            rows.append((name, value))
    return write_csv(path, ("name", "value"), rows)


def write_spectrum(path: Path, rows: Sequence[SpectrumRow]) -> Path:
    width = max(len(row.eigenvalues) for row in rows)
    header = ("A", *[f"eig{i}" for i in range(1, width + 1)])
    return write_csv(path, header, ((row.A, *row.eigenvalues) for row in rows))


def write_spectrum_character(path: Path, rows: Sequence[SpectrumRow]) -> Path:
    width = max(len(row.t1_character) for row in rows)
    header = ("A", *[f"t1_{i}" for i in range(1, width + 1)])
    return write_csv(path, header, ((row.A, *row.t1_character) for row in rows))


def write_optimize(path: Path, free: Sequence[str], trace: Sequence) -> Path:
    header = ("evaluation", *free, "fidelity")
    return write_csv(path, header, ((i, *x, f) for i, (x, f) in enumerate(trace, start=1)))


def write_summary(path: Path, entries: Dict[str, Any]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for key, value in entries.items():
            if isinstance(value, dict):
                for sub_key, sub_value in value.items():
                    f.write(f"{key}.{sub_key} = {format_value(sub_value)}\n")
            else:
                f.write(f"{key} = {format_value(value)}\n")
    return path
