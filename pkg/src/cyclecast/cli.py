"""Command-line front end: simulate, fit, evaluate, acf, report.

Exit codes: 0 success, 1 usage error, 2 data or validation error, 3
numerical failure. All outputs are deterministic for a fixed scenario
and seed, so re-running a command reproduces files byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .evaluate import make_rolling_split, run_comparison, select_lambda
from .exceptions import ConfigError, DataError, NumericalError
from .io import (EvalRow, acf_tables_to_csv, atomic_write,
                 cycle_records_to_csv, eval_rows_to_csv,
                 last_signal_table_csv, panel_to_csv, read_panel,
                 spacing_table_csv, trace_csv, write_coefficients)
from .panel import DEFAULT_MAX_LAG, sample_acf
from .scenario import (ScenarioGrid, cell_stem, load_scenario,
                       with_cli_overrides)
from .sim import CorridorSimulator
from .var import PenaltySpec, build_regression, fit_ols, fit_penalized

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _parse_int_list(raw: str, flag: str):
    try:
        return tuple(int(cell) for cell in raw.split(",") if cell.strip())
    except ValueError as exc:
        raise _UsageError(f"{flag} expects a comma-separated integer list, "
                          f"got {raw!r}") from exc


def build_parser() -> _Parser:
    parser = _Parser(prog="cyclecast",
                     description="Simulate actuated signal corridors and "
                                 "compare next-cycle forecasters.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    sim = sub.add_parser("simulate", help="run a scenario grid, write panels")
    sim.add_argument("--config", required=True, help="scenario file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, help="override the seed list")
    sim.add_argument("--jobs", type=int, default=1, help="parallel workers")
    sim.add_argument("--duration", type=float,
                     help="override sim_duration_s (seconds)")

    fit = sub.add_parser("fit", help="fit one model to a stored panel")
    fit.add_argument("--panel", required=True, help="panel CSV file")
    fit.add_argument("--out", required=True, help="output directory")
    fit.add_argument("--penalty", default="none",
                     choices=("none", "lasso", "hglasso"))
    fit.add_argument("--lags", default="1",
                     help="lag order p (a single integer)")
    fit.add_argument("--lam", type=float,
                     help="fixed penalty weight; tuned on a rolling split "
                          "when omitted")
    fit.add_argument("--lambda-grid-size", type=int, default=20)

    ev = sub.add_parser("evaluate", help="score the five forecaster families")
    ev.add_argument("--config", help="scenario file (simulates the grid)")
    ev.add_argument("--panels", help="directory of stored panel CSVs")
    ev.add_argument("--out", required=True, help="output directory")
    ev.add_argument("--lags", help="comma-separated lag orders")
    ev.add_argument("--holdout", type=int, help="holdout cycles")
    ev.add_argument("--min-train", type=int, dest="min_train")
    ev.add_argument("--seed", type=int, help="override the seed list")
    ev.add_argument("--jobs", type=int, default=1, help="parallel workers")
    ev.add_argument("--duration", type=float,
                    help="override sim_duration_s (seconds)")
    ev.add_argument("--lambda-grid-size", type=int, dest="lambda_grid_size")

    acf = sub.add_parser("acf", help="sample ACF for every component pair")
    acf.add_argument("--panel", required=True, help="panel CSV file")
    acf.add_argument("--out", required=True, help="output CSV path")
    acf.add_argument("--max-lag", type=int, default=DEFAULT_MAX_LAG)

    rep = sub.add_parser("report", help="re-tabulate a raw evaluation CSV")
    rep.add_argument("--raw", required=True, help="raw.csv from evaluate")
    rep.add_argument("--out", required=True, help="output directory")
    return parser


def _simulate_cell(task):
    grid, spacing, demand, seed = task
    config = grid.corridor_config(spacing, demand, seed)
    result = CorridorSimulator(config).run()
    stem = cell_stem(spacing, demand, seed)
    return (stem, panel_to_csv(result.panel),
            cycle_records_to_csv(result.cycle_records))


def _comparison_kwargs(grid: ScenarioGrid) -> dict:
    return dict(lag_list=grid.lags, holdout=grid.holdout,
                min_train=grid.min_train, q_max=grid.q_max,
                grid_size=grid.lambda_grid_size,
                grid_depth=grid.lambda_grid_depth)


def _rows_from_report(report, spacing, demand, seed):
    rows = []
    for entry in report.entries:
        rows.append(EvalRow(
            spacing_m=float(spacing), demand_vph=float(demand),
            seed=int(seed), family=entry.family, lag=entry.lag,
            lam=entry.lam, mspe=entry.mspe,
            last_signal_mspe=float(entry.per_signal_mspe[-1])))
    return rows


def _evaluate_cell(task):
    grid, spacing, demand, seed = task
    config = grid.corridor_config(spacing, demand, seed)
    panel = CorridorSimulator(config).run().panel
    report = run_comparison(panel, **_comparison_kwargs(grid))
    stem = cell_stem(spacing, demand, seed)
    rows = _rows_from_report(report, spacing, demand, seed)
    return stem, rows, trace_csv(report), len(report.component_labels)


def _evaluate_panel_file(task):
    path, grid = task
    panel = read_panel(path)
    meta = panel.meta
    spacing = float(meta.get("spacing_m", 0.0))
    demand = float(meta.get("mainline_demand_vph", 0.0))
    seed = int(meta.get("seed", 0))
    report = run_comparison(panel, **_comparison_kwargs(grid))
    stem = cell_stem(spacing, demand, seed)
    rows = _rows_from_report(report, spacing, demand, seed)
    return stem, rows, trace_csv(report), len(report.component_labels)


def _map_tasks(fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _grid_from_args(args, require_config: bool) -> ScenarioGrid:
    if getattr(args, "config", None):
        grid = load_scenario(args.config)
    elif require_config:
        raise _UsageError("--config is required")
    else:
        grid = ScenarioGrid()
    seeds = (args.seed,) if getattr(args, "seed", None) is not None else None
    lags = None
    if getattr(args, "lags", None):
        lags = _parse_int_list(args.lags, "--lags")
    grid = with_cli_overrides(
        grid, seeds=seeds, lags=lags,
        holdout=getattr(args, "holdout", None),
        duration_s=getattr(args, "duration", None),
        lambda_grid_size=getattr(args, "lambda_grid_size", None))
    if getattr(args, "min_train", None) is not None:
        grid = replace(grid, min_train=int(args.min_train))
    return grid


def _cmd_simulate(args) -> int:
    grid = _grid_from_args(args, require_config=True)
    tasks = [(grid, sp, de, se) for sp, de, se in grid.cells()]
    results = _map_tasks(_simulate_cell, tasks, args.jobs)
    os.makedirs(args.out, exist_ok=True)
    for stem, panel_text, cycles_text in results:
        atomic_write(os.path.join(args.out, f"panel_{stem}.csv"), panel_text)
        atomic_write(os.path.join(args.out, f"cycles_{stem}.csv"), cycles_text)
    print(f"wrote {2 * len(results)} files for {len(results)} scenario "
          f"cells to {args.out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    lags = _parse_int_list(args.lags, "--lags")
    if len(lags) != 1:
        raise _UsageError("fit takes a single lag order, e.g. --lags 2")
    p = lags[0]
    if p < 1:
        raise _UsageError(f"--lags must be >= 1, got {p}")
    panel = read_panel(args.panel)
    reg = build_regression(panel, p)
    if args.penalty == "none":
        model = fit_ols(reg)
    else:
        spec = PenaltySpec(family=args.penalty)
        if args.lam is not None:
            lam = float(args.lam)
        else:
            split = make_rolling_split(panel.n_cycles, p)
            lam = select_lambda(panel, p, spec, split,
                                grid_size=args.lambda_grid_size)
        model = fit_penalized(reg, spec, lam)
    written = write_coefficients(model, args.out)
    print(f"wrote {len(written)} files to {args.out} "
          f"(penalty={args.penalty}, p={p})")
    return EXIT_OK


def _write_eval_outputs(out_dir: str, results) -> None:
    rows = []
    for _, cell_rows, _, _ in results:
        rows.extend(cell_rows)
    rows.sort(key=lambda r: (r.spacing_m, r.demand_vph, r.seed))
    atomic_write(os.path.join(out_dir, "raw.csv"), eval_rows_to_csv(rows))
    for spacing in sorted({r.spacing_m for r in rows}):
        path = os.path.join(out_dir, "tables", f"spacing_{spacing:g}.csv")
        atomic_write(path, spacing_table_csv(rows, spacing))
    atomic_write(os.path.join(out_dir, "signal_last.csv"),
                 last_signal_table_csv(rows))
    for stem, _, trace_text, _ in results:
        atomic_write(os.path.join(out_dir, "traces", f"trace_{stem}.csv"),
                     trace_text)


def _cmd_evaluate(args) -> int:
    if bool(args.config) == bool(args.panels):
        raise _UsageError("evaluate needs exactly one of --config / --panels")
    grid = _grid_from_args(args, require_config=bool(args.config))
    if args.config:
        tasks = [(grid, sp, de, se) for sp, de, se in grid.cells()]
        results = _map_tasks(_evaluate_cell, tasks, args.jobs)
    else:
        if not os.path.isdir(args.panels):
            raise DataError(f"--panels {args.panels} is not a directory")
        paths = sorted(
            os.path.join(args.panels, name)
            for name in os.listdir(args.panels)
            if name.startswith("panel_") and name.endswith(".csv"))
        if not paths:
            raise DataError(f"no panel_*.csv files under {args.panels}")
        tasks = [(path, grid) for path in paths]
        results = _map_tasks(_evaluate_panel_file, tasks, args.jobs)
    os.makedirs(args.out, exist_ok=True)
    _write_eval_outputs(args.out, results)
    print(f"evaluated {len(results)} scenario cells into {args.out}")
    return EXIT_OK


def _cmd_acf(args) -> int:
    panel = read_panel(args.panel)
    tables = []
    for i in range(panel.n_components):
        for j in range(panel.n_components):
            tables.append(sample_acf(panel, i, j, args.max_lag))
    atomic_write(args.out, acf_tables_to_csv(tables))
    print(f"wrote {len(tables)} pair tables to {args.out}")
    return EXIT_OK


def _parse_raw_csv(path: str):
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    rows = []
    with open(path) as handle:
        header = None
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            cells = dict(zip(header, line.split(",")))
            try:
                rows.append(EvalRow(
                    spacing_m=float(cells["spacing_m"]),
                    demand_vph=float(cells["demand_vph"]),
                    seed=int(cells["seed"]),
                    family=cells["family"],
                    lag=int(cells["lag"]) if cells["lag"] else None,
                    lam=float(cells["lambda"]) if cells["lambda"] else None,
                    mspe=float(cells["mspe"]),
                    last_signal_mspe=float(cells["mspe_last_signal"])))
            except (KeyError, ValueError) as exc:
                raise DataError(f"malformed raw results row: {line!r} "
                                f"({exc})") from exc
    if not rows:
        raise DataError(f"{path} holds no result rows")
    return rows


def _cmd_report(args) -> int:
    rows = _parse_raw_csv(args.raw)
    os.makedirs(args.out, exist_ok=True)
    for spacing in sorted({r.spacing_m for r in rows}):
        path = os.path.join(args.out, "tables", f"spacing_{spacing:g}.csv")
        atomic_write(path, spacing_table_csv(rows, spacing))
    atomic_write(os.path.join(args.out, "signal_last.csv"),
                 last_signal_table_csv(rows))
    print(f"tabulated {len(rows)} result rows into {args.out}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "evaluate": _cmd_evaluate,
    "acf": _cmd_acf,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _UsageError("a subcommand is required "
                              f"(one of: {', '.join(_COMMANDS)})")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
