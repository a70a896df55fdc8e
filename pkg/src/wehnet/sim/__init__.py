"""Monte-Carlo engine: PPP deployments on a torus, slot-by-slot CP simulation."""
from .engine import CpOutcome, Realization, SlotResult, realization_streams, run_cp, run_slot, sample_realization
from .estimate import (
    DEFAULT_PROBES,
    McEstimate,
    SimulationResult,
    estimate,
    lifetime_from_result,
    metric_key,
    simulate,
    simulate_lifetime,
)
from .geometry import UniformGrid, Window, nearest, sample_ppp, torus_distance
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "CpOutcome",
    "DEFAULT_PROBES",
    "McEstimate",
    "Realization",
    "SimulationResult",
    "SlotResult",
    "UniformGrid",
    "Window",
    "estimate",
    "lifetime_from_result",
    "metric_key",
    "nearest",
    "realization_streams",
    "run_cp",
    "run_slot",
    "sample_ppp",
    "sample_realization",
    "simulate",
    "simulate_lifetime",
    "torus_distance",
]
