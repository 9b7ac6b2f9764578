"""Scenario files: flat key=value text describing a simulation grid.

A file holds one grid: lists sweep spacing, demand, and seed; every
other key applies to all cells. Lines starting with ``#`` and blank
lines are ignored; lists are comma-separated. Unknown keys are errors
so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .exceptions import ConfigError
from .sim import ControllerConfig, CorridorConfig

_GRID_LIST_KEYS = {"spacings": float, "demands": float, "seeds": int,
                   "lags": int}
_GRID_SCALAR_KEYS = {"holdout": int, "min_train": int, "q_max": int,
                     "lambda_grid_size": int, "lambda_grid_depth": float}
_CORRIDOR_KEYS = {"n_signals": int, "cross_demand_vph": float,
                  "lanes_mainline": int, "free_speed_mps": float,
                  "sim_duration_s": float, "warmup_s": float,
                  "time_step_s": float}
_CONTROLLER_KEYS = {"min_green_s": float, "max_green_s": float,
                    "critical_gap_s": float, "amber_s": float,
                    "all_red_s": float, "upstream_setback_s": float,
                    "saturation_headway_s": float,
                    "startup_allowance_s": float,
                    "dynamic_min_green": bool, "left_turn_skip": bool}


@dataclass(frozen=True)
class ScenarioGrid:
    """A sweep over spacing x demand x seed plus shared settings."""

    spacings: tuple = (200.0, 500.0, 1000.0)
    demands: tuple = (800.0, 1000.0, 1200.0, 1400.0, 1600.0)
    seeds: tuple = (1,)
    lags: tuple = (1,)
    holdout: int = 75
    min_train: int = 100
    q_max: int = 1
    lambda_grid_size: int = 20
    lambda_grid_depth: float = 1000.0
    corridor_overrides: dict = field(default_factory=dict)
    controller_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("spacings", "demands", "seeds", "lags"):
            if not getattr(self, name):
                raise ConfigError(f"scenario list {name!r} is empty")
        if self.holdout < 1 or self.min_train < 1:
            raise ConfigError("holdout and min_train must be >= 1")
        if min(self.lags) < 1:
            raise ConfigError(f"lags must be positive, got {self.lags}")

    def cells(self):
        """All (spacing_m, demand_vph, seed) combinations, sorted."""
        for spacing in self.spacings:
            for demand in self.demands:
                for seed in self.seeds:
                    yield float(spacing), float(demand), int(seed)

    def n_cells(self) -> int:
        return len(self.spacings) * len(self.demands) * len(self.seeds)

    def corridor_config(self, spacing: float, demand: float,
                        seed: int) -> CorridorConfig:
        controller = ControllerConfig(**self.controller_overrides)
        return CorridorConfig(spacing_m=float(spacing),
                              mainline_demand_vph=float(demand),
                              seed=int(seed), controller=controller,
                              **self.corridor_overrides)


def cell_stem(spacing: float, demand: float, seed: int) -> str:
    """Filename stem for one grid cell."""
    return f"sp{spacing:g}_d{demand:g}_seed{seed}"


def _parse_bool(raw: str, key: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: cannot read {raw!r} as a flag")


def _parse_scalar(raw: str, cast, key: str):
    if cast is bool:
        return _parse_bool(raw, key)
    try:
        return cast(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot read {raw!r} as "
                          f"{cast.__name__}") from exc


def _parse_list(raw: str, cast, key: str) -> tuple:
    items = [cell.strip() for cell in raw.split(",") if cell.strip()]
    if not items:
        raise ConfigError(f"{key}: empty list")
    return tuple(_parse_scalar(item, cast, key) for item in items)


def parse_scenario_text(text: str) -> ScenarioGrid:
    grid_kwargs = {}
    corridor = {}
    controller = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, "
                              f"got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip().lower()
        raw = raw.strip()
        if key in _GRID_LIST_KEYS:
            grid_kwargs[key] = _parse_list(raw, _GRID_LIST_KEYS[key], key)
        elif key in _GRID_SCALAR_KEYS:
            grid_kwargs[key] = _parse_scalar(raw, _GRID_SCALAR_KEYS[key], key)
        elif key in _CORRIDOR_KEYS:
            corridor[key] = _parse_scalar(raw, _CORRIDOR_KEYS[key], key)
        elif key in _CONTROLLER_KEYS:
            controller[key] = _parse_scalar(raw, _CONTROLLER_KEYS[key], key)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    grid = ScenarioGrid(corridor_overrides=corridor,
                        controller_overrides=controller, **grid_kwargs)
    for spacing, demand, seed in grid.cells():
        grid.corridor_config(spacing, demand, seed)
        break
    return grid


def load_scenario(path: str) -> ScenarioGrid:
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    return parse_scenario_text(text)


def with_cli_overrides(grid: ScenarioGrid, *, seeds=None, lags=None,
                       holdout=None, duration_s=None,
                       lambda_grid_size=None) -> ScenarioGrid:
    """Apply command-line overrides on top of a parsed scenario."""
    updates = {}
    if seeds is not None:
        updates["seeds"] = tuple(int(s) for s in seeds)
    if lags is not None:
        updates["lags"] = tuple(int(p) for p in lags)
    if holdout is not None:
        updates["holdout"] = int(holdout)
    if lambda_grid_size is not None:
        updates["lambda_grid_size"] = int(lambda_grid_size)
    if duration_s is not None:
        corridor = dict(grid.corridor_overrides)
        corridor["sim_duration_s"] = float(duration_s)
        updates["corridor_overrides"] = corridor
    if not updates:
        return grid
    return replace(grid, **updates)
