"""CSV/JSON emission for time series and diagnostic records."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .dynamics import TimeSeries


@dataclass
class DiagnosticRecord:
    """One checked quantity: ``passed`` is ``value <= tolerance`` unless ``mode`` says otherwise."""

    name: str
    value: float
    tolerance: float
    anchor: str
    params: dict = field(default_factory=dict)
    mode: str = "max"  # "max": value <= tol, "min": value >= tol, "flag": value truthy
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = evaluate(self.value, self.tolerance, self.mode)

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "params": _jsonable(self.params),
            "value": _num(self.value),
            "tolerance": _num(self.tolerance),
            "pass": bool(self.passed),
            "anchor": self.anchor,
        }
        return out


def evaluate(value: float, tolerance: float, mode: str) -> bool:
    if mode == "flag":
        return bool(value)
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return False
    if mode == "max":
        return value <= tolerance
    if mode == "min":
        return value >= tolerance
    raise ValueError(f"unknown comparison mode {mode!r}")


def _num(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _num(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(asdict(obj))
    return obj


def series_columns(series: TimeSeries) -> list[str]:
    conc = [f"conc_R{i + 1}" for i in range(len(series.concentration))]
    return ["t", "mass", "energy", "hs_norm", *conc, "m_phi", "virial_rhs", "y", "scatter_residual"]


def series_table(series: TimeSeries) -> np.ndarray:
    cols = [series.t, series.mass, series.energy, series.hs_norm]
    cols += [series.concentration[R] for R in series.concentration]
    cols += [series.m_phi, series.virial_rhs, series.y_coercivity, series.scatter_residual]
    lengths = {len(c) for c in cols}
    if len(lengths) != 1:
        raise ValueError(f"time-series columns disagree in length: {sorted(lengths)}")
    return np.column_stack(cols) if cols[0].size else np.empty((0, len(cols)))


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def write_series_csv(series: TimeSeries, path) -> None:
    table = series_table(series)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(series_columns(series))
        for row in table:
            w.writerow([_fmt(x) for x in row])


def summarize_series(series: TimeSeries, records: Sequence[DiagnosticRecord] = ()) -> dict:
    names = series_columns(series)
    table = series_table(series)
    columns = {}
    for j, name in enumerate(names):
        col = table[:, j]
        finite = col[np.isfinite(col)]
        columns[name] = {
            "final": _num(col[-1]),
            "min": _num(finite.min()) if finite.size else None,
            "max": _num(finite.max()) if finite.size else None,
        }
    return {
        "status": series.status,
        "records": len(series),
        "t_wrap": _num(series.t_wrap),
        "radii": {f"conc_R{i + 1}": float(R) for i, R in enumerate(series.concentration)},
        "columns": columns,
        "diagnostics": [r.to_json() for r in records],
        "pass": all(r.passed for r in records),
    }


def emit_series(series: TimeSeries, path_csv, path_json_summary, records: Sequence[DiagnosticRecord] = ()) -> dict:
    """Write the CSV table and the JSON summary; returns the summary."""
    if len(series) == 0:
        raise ValueError("cannot emit an empty time series")
    write_series_csv(series, path_csv)
    summary = summarize_series(series, records)
    write_json(summary, path_json_summary)
    return summary


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=False)
        fh.write("\n")


def write_records(records: Iterable[DiagnosticRecord], path) -> None:
    write_json([r.to_json() for r in records], path)


def write_scan_csv(path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    """Two-or-more column scan table (``R`` or ``t`` against values) for plotting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return str(path)
