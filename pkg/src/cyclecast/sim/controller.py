"""Fully-actuated signal controller as an integer-step state machine.

Timing is kept in whole time steps so phase transitions never drift with
float accumulation. A phase owns its change interval: its color runs
green -> amber -> all-red, and the next phase's green begins the step
the all-red expires, so exactly one phase is non-red at any instant.

Termination of a green follows the latched per-lane rule: a lane is
"gapped out" once the time since its last upstream detection (or since
the green began) exceeds the critical gap, and the phase may end only
when every lane has gapped out at some point during the green and the
effective minimum green has elapsed. Max-out ends the green regardless.
The dynamic minimum green ratchets upward while the green runs: it is
the largest value of max(min_green, max_lane(cars_in_trap) * headway +
startup allowance) seen so far, capped at max green, so a queue counted
into the trap keeps its clearance time even as it drains.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..exceptions import DataError
from .config import ControllerConfig, seconds_to_steps

GREEN = "green"
AMBER = "amber"
ALL_RED = "all-red"
RED = "red"


@dataclass(frozen=True)
class PhaseDef:
    """One critical phase: its identifier and the lanes it serves."""

    phase_id: int
    lanes: tuple[str, ...]

    def __post_init__(self):
        if not self.lanes:
            raise DataError(f"phase {self.phase_id} has no lanes")


@dataclass(frozen=True)
class PhaseState:
    """Inspection snapshot of one phase at the current step."""

    phase_id: int
    color: str
    green_elapsed_s: float
    per_lane_gap_timers_s: dict
    per_lane_gapped_out: dict
    cars_in_trap: dict
    dynamic_min_green_s: float


@dataclass(frozen=True)
class CycleRecord:
    """One completed cycle at one signal."""

    signal_id: int
    cycle_index: int
    cycle_length_s: float
    per_phase_green_s: tuple
    start_time_s: float


class SignalController:
    """State machine for one signal; call advance() then observe() per step."""

    def __init__(self, config: ControllerConfig, phases, sps: int,
                 signal_id: int = 0):
        phases = tuple(phases)
        if not phases:
            raise DataError("controller needs at least one phase")
        lane_to_phase = {}
        for idx, phase in enumerate(phases):
            for lane in phase.lanes:
                if lane in lane_to_phase:
                    raise DataError(f"lane {lane!r} assigned to two phases")
                lane_to_phase[lane] = idx
        self.config = config
        self.phases = phases
        self.sps = int(sps)
        self.signal_id = signal_id
        self._lane_phase = lane_to_phase
        self._min_green = seconds_to_steps(config.min_green_s, sps)
        self._max_green = seconds_to_steps(config.max_green_s, sps)
        self._amber = seconds_to_steps(config.amber_s, sps)
        self._all_red = seconds_to_steps(config.all_red_s, sps)
        self._gap = seconds_to_steps(config.critical_gap_s, sps)
        self._headway = seconds_to_steps(config.saturation_headway_s, sps)
        self._startup = seconds_to_steps(config.startup_allowance_s, sps)
        self.trap = {lane: 0 for lane in lane_to_phase}
        self._last_pulse = {lane: None for lane in lane_to_phase}
        self._latched = {lane: False for lane in lane_to_phase}
        self.records = []
        self._cycle_index = 0
        self._cycle_start = 0
        self._greens = []
        self._now = 0
        self.active = 0
        self.color = GREEN
        self._state_start = 0
        self._green_start = 0
        self._eff_min = self._dynamic_min()

    @property
    def green_lanes(self) -> frozenset:
        """Lanes currently allowed to cross the stop line."""
        if self.color != GREEN:
            return frozenset()
        return frozenset(self.phases[self.active].lanes)

    @property
    def green_start_step(self) -> int:
        """Step at which the current (or most recent) green began."""
        return self._green_start

    def _dynamic_min(self) -> int:
        if not self.config.dynamic_min_green:
            return self._min_green
        worst = max(self.trap[lane] for lane in self.phases[self.active].lanes)
        dyn = worst * self._headway + self._startup
        return min(self._max_green, max(self._min_green, dyn))

    def _update_latches(self, step: int) -> None:
        for lane in self.phases[self.active].lanes:
            if self._latched[lane]:
                continue
            base = self._green_start
            last = self._last_pulse[lane]
            if last is not None and last > base:
                base = last
            if step - base > self._gap:
                self._latched[lane] = True

    def _begin_green(self, step: int, phase_idx: int) -> None:
        self.active = phase_idx
        self.color = GREEN
        self._state_start = step
        self._green_start = step
        for lane in self.phases[phase_idx].lanes:
            self._latched[lane] = False
        self._eff_min = self._dynamic_min()

    def _choose_next(self, calls) -> int:
        n = len(self.phases)
        nxt = (self.active + 1) % n
        if not self.config.left_turn_skip or calls is None:
            return nxt
        for offset in range(n):
            candidate = (nxt + offset) % n
            if calls.get(self.phases[candidate].phase_id, False):
                return candidate
        return nxt

    def _begin_next_green(self, step: int, calls):
        chosen = self._choose_next(calls)
        record = None
        if chosen == 0:
            record = CycleRecord(
                signal_id=self.signal_id,
                cycle_index=self._cycle_index,
                cycle_length_s=(step - self._cycle_start) / self.sps,
                per_phase_green_s=tuple(self._greens),
                start_time_s=self._cycle_start / self.sps,
            )
            self.records.append(record)
            self._cycle_index += 1
            self._cycle_start = step
            self._greens = []
        self._begin_green(step, chosen)
        return record

    def advance(self, step: int, calls=None):
        """Run phase transitions due at the start of this step.

        Uses detections observed through the previous step. Returns the
        CycleRecord closed by this step's transition, if any.
        """
        self._now = step
        event = None
        while True:
            if self.color == GREEN:
                self._update_latches(step)
                if self.config.dynamic_min_green:
                    dyn = self._dynamic_min()
                    if dyn > self._eff_min:
                        self._eff_min = dyn
                elapsed = step - self._green_start
                lanes = self.phases[self.active].lanes
                gapped = (elapsed >= self._eff_min
                          and all(self._latched[lane] for lane in lanes))
                if gapped or elapsed >= self._max_green:
                    self._greens.append(elapsed / self.sps)
                    self.color = AMBER
                    self._state_start = step
                    continue
                return event
            if self.color == AMBER:
                if step - self._state_start >= self._amber:
                    self.color = ALL_RED
                    self._state_start = step
                    continue
                return event
            if step - self._state_start >= self._all_red:
                record = self._begin_next_green(step, calls)
                if record is not None:
                    event = record
                continue
            return event

    def observe(self, step: int, upstream=(), stopline=()) -> None:
        """Ingest this step's detector pulses (after traffic is served)."""
        for lane in upstream:
            if lane not in self._lane_phase:
                raise DataError(f"upstream pulse for unknown lane {lane!r}")
            self.trap[lane] += 1
            self._last_pulse[lane] = step
        for lane in stopline:
            if lane not in self._lane_phase:
                raise DataError(f"stop-line pulse for unknown lane {lane!r}")
            if self.trap[lane] == 0:
                raise DataError(
                    f"stop-line pulse on lane {lane!r} with empty trap")
            self.trap[lane] -= 1

    def step(self, step: int, upstream=(), stopline=(), calls=None):
        """Advance transitions, then ingest this step's detections."""
        event = self.advance(step, calls)
        self.observe(step, upstream, stopline)
        return event

    def phase_states(self):
        """Snapshot every phase; timers in seconds at the current step."""
        states = []
        for idx, phase in enumerate(self.phases):
            is_active = idx == self.active
            color = self.color if is_active else RED
            elapsed = 0.0
            if is_active and self.color == GREEN:
                elapsed = (self._now - self._green_start) / self.sps
            timers = {}
            for lane in phase.lanes:
                base = self._green_start if is_active else 0
                last = self._last_pulse[lane]
                if last is not None and last > base:
                    base = last
                timers[lane] = (self._now - base) / self.sps
            states.append(PhaseState(
                phase_id=phase.phase_id,
                color=color,
                green_elapsed_s=elapsed,
                per_lane_gap_timers_s=timers,
                per_lane_gapped_out={lane: self._latched[lane]
                                     for lane in phase.lanes},
                cars_in_trap={lane: self.trap[lane] for lane in phase.lanes},
                dynamic_min_green_s=(self._eff_min if is_active
                                     else self._min_green) / self.sps,
            ))
        return tuple(states)
