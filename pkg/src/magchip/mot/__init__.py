"""Semiclassical six-beam magneto-optical trap simulation."""

from .config import AtomSpecies, Beam, MOTConfig, rb85, six_beam_config
from .forces import beam_scattering_forces, scattering_rates, total_force
from .integrate import AtomEnsemble, step_atom, step_ensemble
from .sim import (
    CloudSummary,
    capture_metric,
    simulate_cloud,
    transport_following,
)

__all__ = [
    "AtomEnsemble",
    "AtomSpecies",
    "Beam",
    "CloudSummary",
    "MOTConfig",
    "beam_scattering_forces",
    "capture_metric",
    "rb85",
    "scattering_rates",
    "simulate_cloud",
    "six_beam_config",
    "step_atom",
    "step_ensemble",
    "total_force",
    "transport_following",
]
