"""Actuated controller state machine driven step by step with scripted pulses.

Timing convention under test: transitions are evaluated at the start of a
step from detections seen through the previous step. With min green 12 s,
amber 3 s, all-red 2 s and two phases, a controller that never sees a
vehicle rotates in exactly 34 s.
"""

import pytest

from cyclecast import DataError
from cyclecast.sim import ControllerConfig, PhaseDef, SignalController
from cyclecast.sim.controller import ALL_RED, AMBER, GREEN, RED

SPS = 10


def two_phase_controller(sps=SPS, **overrides):
    config = ControllerConfig(**overrides)
    phases = (PhaseDef(0, ("main_a", "main_b")), PhaseDef(1, ("cross",)))
    return SignalController(config, phases, sps=sps, signal_id=1)


def run_quiet(ctrl, n_steps, start=0):
    """Advance with no detections; collect completed cycle records."""
    records = []
    for step in range(start, start + n_steps):
        event = ctrl.step(step)
        if event is not None:
            records.append(event)
    return records


class TestQuietRotation:
    def test_cycle_length_is_exactly_34s(self):
        ctrl = two_phase_controller()
        records = run_quiet(ctrl, 3500)
        assert len(records) >= 9
        assert {r.cycle_length_s for r in records} == {34.0}

    def test_greens_held_at_minimum(self):
        ctrl = two_phase_controller()
        records = run_quiet(ctrl, 3500)
        for record in records:
            assert record.per_phase_green_s == (12.0, 12.0)

    def test_cycle_records_are_contiguous(self):
        ctrl = two_phase_controller()
        records = run_quiet(ctrl, 3500)
        for i, record in enumerate(records):
            assert record.cycle_index == i
            assert record.start_time_s == pytest.approx(i * 34.0)
            assert record.signal_id == 1

    def test_one_second_step_gives_same_cycle(self):
        ctrl = two_phase_controller(sps=1)
        records = run_quiet(ctrl, 350)
        assert {r.cycle_length_s for r in records} == {34.0}


class TestMaxOut:
    def test_continuous_pulses_force_50s_green(self):
        ctrl = two_phase_controller()
        records = []
        for step in range(4000):
            event = ctrl.advance(step)
            if event is not None:
                records.append(event)
            # every lane of every phase sees a vehicle every step, so no
            # lane ever gaps out and the trap keeps growing
            ctrl.observe(step, upstream=("main_a", "main_b", "cross"))
        assert records, "no cycle completed"
        for record in records:
            assert record.per_phase_green_s == (50.0, 50.0)
            assert record.cycle_length_s == 110.0

    def test_green_never_exceeds_max(self):
        ctrl = two_phase_controller()
        for step in range(4000):
            ctrl.advance(step)
            if ctrl.color == GREEN:
                elapsed = (step - ctrl.green_start_step) / SPS
                assert elapsed <= ctrl.config.max_green_s
            ctrl.observe(step, upstream=("main_a", "main_b", "cross"))


class TestGapOut:
    def test_quiet_green_ends_exactly_at_minimum(self):
        ctrl = two_phase_controller()
        # green for phase 0 starts at step 0; with no detections every lane
        # latches after the critical gap and the green ends at min green
        for step in range(0, 120):
            ctrl.advance(step)
            assert ctrl.color == GREEN, f"green ended early at step {step}"
            ctrl.observe(step)
        ctrl.advance(120)
        assert ctrl.color == AMBER

    def test_pulse_on_one_lane_postpones_nothing_when_already_latched(self):
        # Latch is sticky: once a lane has shown a long-enough gap, a later
        # arrival does not reset it within the same green.
        ctrl = two_phase_controller(max_green_s=30.0)
        for step in range(0, 115):
            ctrl.advance(step)
            pulses = ("main_a",) if step == 112 else ()
            ctrl.observe(step, upstream=pulses)
        # all lanes latched by step 31; min green passed at 120 despite the
        # late arrival on main_a at 112
        ctrl.advance(120)
        assert ctrl.color == AMBER

    def test_steady_traffic_on_one_lane_blocks_gap_out(self):
        ctrl = two_phase_controller()
        # main_a sees a car every 2 s (20 steps) which is under the 3 s
        # critical gap, so it never latches and green runs to max-out
        for step in range(0, 500):
            ctrl.advance(step)
            assert ctrl.color == GREEN
            pulses = ("main_a",) if step % 20 == 0 else ()
            ctrl.observe(step, upstream=pulses)
        ctrl.advance(500)
        assert ctrl.color == AMBER


class TestDynamicMinimum:
    def test_ten_car_trap_holds_green_for_22s(self):
        # 10 cars upstream in the first second: effective minimum becomes
        # 10 * 2 + 2 = 22 s and stays there even after the lane latches.
        ctrl = two_phase_controller()
        for step in range(0, 220):
            ctrl.advance(step)
            assert ctrl.color == GREEN, f"ended early at step {step}"
            pulses = ("main_a",) if step < 10 else ()
            ctrl.observe(step, upstream=pulses)
        ctrl.advance(220)
        assert ctrl.color == AMBER

    def test_ratchet_survives_trap_draining(self):
        # Cars leave the trap over the stop line, but the effective minimum
        # keeps the peak clearance estimate.
        ctrl = two_phase_controller()
        for step in range(0, 220):
            ctrl.advance(step)
            assert ctrl.color == GREEN
            upstream = ("main_a",) if step < 10 else ()
            stopline = ("main_a",) if 20 <= step < 30 else ()
            ctrl.observe(step, upstream=upstream, stopline=stopline)
        assert ctrl.trap["main_a"] == 0
        ctrl.advance(220)
        assert ctrl.color == AMBER

    def test_static_minimum_when_disabled(self):
        ctrl = two_phase_controller(dynamic_min_green=False)
        for step in range(0, 120):
            ctrl.advance(step)
            assert ctrl.color == GREEN
            pulses = ("main_a",) if step < 10 else ()
            ctrl.observe(step, upstream=pulses)
        # last pulse at step 9, latch at step 41; static minimum 120 rules
        ctrl.advance(120)
        assert ctrl.color == AMBER

    def test_effective_minimum_capped_at_max_green(self):
        ctrl = two_phase_controller()
        for step in range(0, 100):
            ctrl.advance(step)
            ctrl.observe(step, upstream=("main_a",))
        states = ctrl.phase_states()
        assert states[0].dynamic_min_green_s <= ctrl.config.max_green_s


class TestObservation:
    def test_unknown_lane_rejected(self):
        ctrl = two_phase_controller()
        ctrl.advance(0)
        with pytest.raises(DataError):
            ctrl.observe(0, upstream=("nope",))
        with pytest.raises(DataError):
            ctrl.observe(0, stopline=("nope",))

    def test_stopline_with_empty_trap_rejected(self):
        ctrl = two_phase_controller()
        ctrl.advance(0)
        with pytest.raises(DataError):
            ctrl.observe(0, stopline=("main_a",))

    def test_trap_counts_conserve_pulses(self):
        ctrl = two_phase_controller()
        ctrl.advance(0)
        ctrl.observe(0, upstream=("main_a", "main_a"))
        assert ctrl.trap["main_a"] == 2
        ctrl.advance(1)
        ctrl.observe(1, stopline=("main_a",))
        assert ctrl.trap["main_a"] == 1

    def test_lane_in_two_phases_rejected(self):
        config = ControllerConfig()
        phases = (PhaseDef(0, ("a",)), PhaseDef(1, ("a",)))
        with pytest.raises(DataError):
            SignalController(config, phases, sps=10)


class TestPhaseStates:
    def test_exactly_one_phase_non_red(self):
        ctrl = two_phase_controller()
        for step in range(0, 800):
            ctrl.step(step)
            states = ctrl.phase_states()
            non_red = [s for s in states if s.color != RED]
            assert len(non_red) == 1
            assert non_red[0].color in (GREEN, AMBER, ALL_RED)

    def test_snapshot_fields(self):
        ctrl = two_phase_controller()
        ctrl.step(0, upstream=("main_a",))
        states = ctrl.phase_states()
        assert states[0].phase_id == 0
        assert states[0].color == GREEN
        assert states[0].cars_in_trap == {"main_a": 1, "main_b": 0}
        assert states[1].color == RED

    def test_green_elapsed_tracks_steps(self):
        ctrl = two_phase_controller()
        for step in range(0, 50):
            ctrl.step(step)
        assert ctrl.phase_states()[0].green_elapsed_s == pytest.approx(4.9)


class TestPhaseSkip:
    def test_idle_cross_phase_skipped_when_enabled(self):
        ctrl = two_phase_controller(left_turn_skip=True)
        colors = []
        for step in range(0, 600):
            ctrl.step(step, calls={0: True, 1: False})
            colors.append((ctrl.active, ctrl.color))
        assert all(active == 0 for active, _ in colors)

    def test_waiting_call_is_served(self):
        ctrl = two_phase_controller(left_turn_skip=True)
        served_cross = False
        for step in range(0, 600):
            ctrl.step(step, calls={0: True, 1: True})
            if ctrl.active == 1 and ctrl.color == GREEN:
                served_cross = True
        assert served_cross

    def test_skip_disabled_serves_round_robin(self):
        ctrl = two_phase_controller()
        actives = set()
        for step in range(0, 600):
            ctrl.step(step, calls={0: True, 1: False})
            actives.add(ctrl.active)
        assert actives == {0, 1}
