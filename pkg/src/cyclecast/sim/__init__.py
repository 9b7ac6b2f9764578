"""Corridor microsimulation: scenario config, signal controller, engine."""

from .config import ControllerConfig, CorridorConfig
from .controller import CycleRecord, PhaseDef, PhaseState, SignalController
from .corridor import (CorridorSimulator, SimulationResult, detector_events,
                       simulate_corridor)

__all__ = [
    "ControllerConfig",
    "CorridorConfig",
    "CorridorSimulator",
    "CycleRecord",
    "PhaseDef",
    "PhaseState",
    "SignalController",
    "SimulationResult",
    "detector_events",
    "simulate_corridor",
]
