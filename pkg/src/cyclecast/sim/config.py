"""Scenario configuration for the corridor simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..exceptions import ConfigError

ALLOWED_TIME_STEPS = (1.0, 0.1)


@dataclass(frozen=True)
class ControllerConfig:
    """Fully-actuated controller settings shared by every signal.

    The change interval (amber plus all-red) belongs to the ending phase,
    so a two-phase cycle is sum(green + amber + all_red) over both phases.
    """

    min_green_s: float = 12.0
    max_green_s: float = 50.0
    critical_gap_s: float = 3.0
    amber_s: float = 3.0
    all_red_s: float = 2.0
    upstream_setback_s: float = 2.0
    saturation_headway_s: float = 2.0
    startup_allowance_s: float = 2.0
    dynamic_min_green: bool = True
    left_turn_skip: bool = False

    def __post_init__(self):
        if not 0 < self.min_green_s < self.max_green_s:
            raise ConfigError(
                f"need 0 < min_green_s < max_green_s, got "
                f"({self.min_green_s}, {self.max_green_s})")
        if self.critical_gap_s <= 0:
            raise ConfigError(f"critical_gap_s={self.critical_gap_s} must be > 0")
        if self.amber_s < 0 or self.all_red_s < 0:
            raise ConfigError("amber_s and all_red_s must be >= 0")
        if self.amber_s + self.all_red_s <= 0:
            raise ConfigError("change interval amber_s + all_red_s must be > 0")
        if self.saturation_headway_s <= 0:
            raise ConfigError(
                f"saturation_headway_s={self.saturation_headway_s} must be > 0")
        if self.upstream_setback_s < 0 or self.startup_allowance_s < 0:
            raise ConfigError(
                "upstream_setback_s and startup_allowance_s must be >= 0")

    @property
    def change_interval_s(self) -> float:
        return self.amber_s + self.all_red_s


@dataclass(frozen=True)
class CorridorConfig:
    """One-way corridor scenario: geometry, demand, horizon, seed."""

    n_signals: int = 5
    spacing_m: float = 500.0
    mainline_demand_vph: float = 1200.0
    cross_demand_vph: float = 600.0
    lanes_mainline: int = 2
    free_speed_mps: float = 14.0
    sim_duration_s: float = 18900.0
    warmup_s: float = 900.0
    time_step_s: float = 0.1
    seed: int = 0
    controller: ControllerConfig = field(default_factory=ControllerConfig)

    def __post_init__(self):
        if not 1 <= int(self.n_signals) <= 16:
            raise ConfigError(f"n_signals={self.n_signals} outside 1..16")
        if self.spacing_m <= 0:
            raise ConfigError(f"spacing_m={self.spacing_m} must be > 0")
        if self.mainline_demand_vph < 0 or self.cross_demand_vph < 0:
            raise ConfigError("demands must be >= 0")
        if int(self.lanes_mainline) < 1:
            raise ConfigError(f"lanes_mainline={self.lanes_mainline} must be >= 1")
        if self.free_speed_mps <= 0:
            raise ConfigError(f"free_speed_mps={self.free_speed_mps} must be > 0")
        if self.time_step_s not in ALLOWED_TIME_STEPS:
            raise ConfigError(
                f"time_step_s={self.time_step_s} not in {ALLOWED_TIME_STEPS}")
        if not 0 <= self.warmup_s < self.sim_duration_s:
            raise ConfigError(
                f"need 0 <= warmup_s < sim_duration_s, got "
                f"({self.warmup_s}, {self.sim_duration_s})")
        for label, value in (("sim_duration_s", self.sim_duration_s),
                             ("warmup_s", self.warmup_s)):
            steps = value / self.time_step_s
            if abs(steps - round(steps)) > 1e-9:
                raise ConfigError(
                    f"{label}={value} is not a multiple of "
                    f"time_step_s={self.time_step_s}")
        if int(self.seed) < 0:
            raise ConfigError(f"seed={self.seed} must be >= 0")

    @property
    def steps_per_second(self) -> int:
        return round(1.0 / self.time_step_s)

    @property
    def n_steps(self) -> int:
        return round(self.sim_duration_s * self.steps_per_second)

    @property
    def upstream_setback_m(self) -> float:
        return self.controller.upstream_setback_s * self.free_speed_mps

    def meta(self) -> dict:
        return {
            "n_signals": int(self.n_signals),
            "spacing_m": float(self.spacing_m),
            "mainline_demand_vph": float(self.mainline_demand_vph),
            "cross_demand_vph": float(self.cross_demand_vph),
            "seed": int(self.seed),
            "sim_duration_s": float(self.sim_duration_s),
            "warmup_s": float(self.warmup_s),
            "time_step_s": float(self.time_step_s),
        }


def seconds_to_steps(value_s: float, sps: int) -> int:
    """Seconds to an integer step count, requiring near-exact conversion.

    Durations compared against elapsed time (greens, change intervals,
    critical gap) are held as integer step counts so no float drift can
    shift a transition by one step.
    """
    steps = value_s * sps
    nearest = round(steps)
    if not math.isclose(steps, nearest, abs_tol=1e-6):
        raise ConfigError(f"{value_s} s is not representable at {sps} steps/s")
    return int(nearest)
