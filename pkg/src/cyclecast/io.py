"""CSV and manifest serialization.

All files are plain comma-separated text with ``#``-prefixed comment
lines for metadata. Floats are written with repr so a re-run with the
same seed produces byte-identical files; nothing time-dependent is ever
written. Writes go through a temp file and os.replace, so readers never
see a partial file.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from statistics import median

import numpy as np

from .exceptions import DataError
from .panel import AcfTable, PanelSeries, make_panel
from .univariate import ArmaModel
from .var import CoefficientSet


def fmt(value) -> str:
    """Stable scalar formatting: ints bare, floats via repr."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def atomic_write(path: str, text: str) -> None:
    """Write text to path via a temp file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def panel_to_csv(panel: PanelSeries) -> str:
    lines = [f"# {key}={fmt(val)}" for key, val in sorted(panel.meta.items())]
    lines.append(",".join(panel.component_labels))
    for t in range(panel.n_cycles):
        lines.append(",".join(fmt(float(v)) for v in panel.values[:, t]))
    return "\n".join(lines) + "\n"


def _parse_meta_value(raw: str):
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def panel_from_csv(text: str) -> PanelSeries:
    meta = {}
    header = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, raw = body.split("=", 1)
                meta[key.strip()] = _parse_meta_value(raw.strip())
            continue
        if header is None:
            header = [cell.strip() for cell in line.split(",")]
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} cells, "
                            f"got {len(cells)}")
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError as exc:
            raise DataError(f"line {lineno}: non-numeric cell ({exc})") from exc
    if header is None or not rows:
        raise DataError("panel file has no data rows")
    values = np.asarray(rows, dtype=float).T
    return make_panel(list(values), labels=header, meta=meta)


def write_panel(panel: PanelSeries, path: str) -> None:
    atomic_write(path, panel_to_csv(panel))


def read_panel(path: str) -> PanelSeries:
    if not os.path.isfile(path):
        raise DataError(f"no such panel file: {path}")
    with open(path) as handle:
        return panel_from_csv(handle.read())


def cycle_records_to_csv(records) -> str:
    records = list(records)
    if not records:
        raise DataError("no cycle records to write")
    n_phases = max(len(r.per_phase_green_s) for r in records)
    header = ["signal_id", "cycle_index", "start_time_s", "cycle_length_s"]
    header += [f"green_{i + 1}_s" for i in range(n_phases)]
    lines = [",".join(header)]
    for r in records:
        cells = [str(int(r.signal_id)), str(int(r.cycle_index)),
                 fmt(float(r.start_time_s)), fmt(float(r.cycle_length_s))]
        greens = list(r.per_phase_green_s)
        cells += [fmt(float(g)) for g in greens]
        cells += [""] * (n_phases - len(greens))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def acf_tables_to_csv(tables) -> str:
    """All (i, j) pair tables stacked in one file."""
    tables = list(tables)
    if not tables:
        raise DataError("no correlation tables to write")
    lines = ["i,j,lag,correlation"]
    for table in tables:
        if not isinstance(table, AcfTable):
            raise DataError(f"expected AcfTable, got {type(table).__name__}")
        i, j = table.pair
        for lag, corr in zip(table.lags, table.correlations):
            lines.append(f"{i},{j},{int(lag)},{fmt(float(corr))}")
    return "\n".join(lines) + "\n"


def coefficient_manifest(model: CoefficientSet) -> str:
    lines = [f"penalty={model.penalty}",
             f"p={model.n_lags}"]
    if model.penalty != "none":
        lines.append(f"lambda={fmt(float(model.lam))}")
    total_iters = 0 if model.n_iter is None else sum(model.n_iter)
    lines.append(f"iterations={int(total_iters)}")
    lines.append("intercept=" + ",".join(fmt(float(v))
                                         for v in model.intercept))
    return "\n".join(lines) + "\n"


def matrix_to_csv(matrix) -> str:
    matrix = np.asarray(matrix, dtype=float)
    return "\n".join(",".join(fmt(float(v)) for v in row)
                     for row in matrix) + "\n"


def write_coefficients(model: CoefficientSet, out_dir: str) -> list:
    """Per-lag matrix CSVs plus manifest.txt; returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for lag in range(model.n_lags):
        path = os.path.join(out_dir, f"phi_lag{lag + 1}.csv")
        atomic_write(path, matrix_to_csv(model.lag_matrices[lag]))
        written.append(path)
    manifest = os.path.join(out_dir, "manifest.txt")
    atomic_write(manifest, coefficient_manifest(model))
    written.append(manifest)
    return written


def arma_manifest(models, labels=None) -> str:
    """Text dump of per-signal ARMA fits: order, mean, coefficients."""
    models = list(models)
    labels = labels or [f"s{i + 1}" for i in range(len(models))]
    lines = []
    for label, model in zip(labels, models):
        if not isinstance(model, ArmaModel):
            raise DataError(f"expected ArmaModel, got {type(model).__name__}")
        lines.append(f"[{label}]")
        lines.append(f"p={model.p}")
        lines.append(f"q={model.q}")
        lines.append(f"mean={fmt(float(model.mean))}")
        lines.append("ar=" + ",".join(fmt(float(v)) for v in model.ar))
        lines.append("ma=" + ",".join(fmt(float(v)) for v in model.ma))
        lines.append(f"noise_var={fmt(float(model.noise_var))}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EvalRow:
    """One model's holdout score in one scenario cell."""

    spacing_m: float
    demand_vph: float
    seed: int
    family: str
    lag: int | None
    lam: float | None
    mspe: float
    last_signal_mspe: float


def eval_rows_to_csv(rows) -> str:
    lines = ["spacing_m,demand_vph,seed,family,lag,lambda,mspe,"
             "mspe_last_signal"]
    for r in rows:
        lag = "" if r.lag is None else str(int(r.lag))
        lam = "" if r.lam is None else fmt(float(r.lam))
        lines.append(",".join([
            fmt(float(r.spacing_m)), fmt(float(r.demand_vph)),
            str(int(r.seed)), r.family, lag, lam, fmt(float(r.mspe)),
            fmt(float(r.last_signal_mspe))]))
    return "\n".join(lines) + "\n"


def _demand_label(demand: float) -> str:
    return str(int(demand)) if float(demand).is_integer() else repr(demand)


def _median_table(rows, value) -> str:
    demands = sorted({r.demand_vph for r in rows})
    combos = []
    for r in rows:
        key = (r.family, r.lag)
        if key not in combos:
            combos.append(key)
    lines = ["family,lag," + ",".join(_demand_label(d) for d in demands)]
    for family, lag in combos:
        cells = [family, "" if lag is None else str(int(lag))]
        for demand in demands:
            scores = [value(r) for r in rows
                      if r.family == family and r.lag == lag
                      and r.demand_vph == demand]
            cells.append(fmt(float(median(scores))) if scores else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def spacing_table_csv(rows, spacing: float) -> str:
    """Rows = family x lag, columns = demand levels, median over seeds."""
    subset = [r for r in rows if r.spacing_m == spacing]
    if not subset:
        raise DataError(f"no results at spacing {spacing}")
    header = f"# spacing_m={fmt(float(spacing))}\n"
    return header + _median_table(subset, lambda r: r.mspe)


def last_signal_table_csv(rows) -> str:
    """Same layout, scoring only the most-downstream signal."""
    if not rows:
        raise DataError("no results to tabulate")
    spacings = sorted({r.spacing_m for r in rows})
    chunks = []
    for spacing in spacings:
        subset = [r for r in rows if r.spacing_m == spacing]
        chunks.append(f"# spacing_m={fmt(float(spacing))}\n"
                      + _median_table(subset, lambda r: r.last_signal_mspe))
    return "\n".join(chunks)


def trace_csv(report) -> str:
    """Holdout predictions next to actuals, one row per (cycle, signal)."""
    names = []
    for entry in report.entries:
        name = entry.family if entry.lag is None else \
            f"{entry.family}_lag{entry.lag}"
        names.append(name)
    lines = ["cycle_index,signal,actual," + ",".join(names)]
    k, horizon = report.actual.shape
    for t in range(horizon):
        for i, label in enumerate(report.component_labels):
            cells = [str(report.holdout_start + t), label,
                     fmt(float(report.actual[i, t]))]
            cells += [fmt(float(entry.trace[i, t]))
                      for entry in report.entries]
            lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
