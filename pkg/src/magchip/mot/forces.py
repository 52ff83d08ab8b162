"""Semiclassical scattering forces of the six-beam MOT.

Per beam i the force on a two-level atom is

    F_i = hbar k k_i (Gamma/2) s_i / (1 + s_tot + (2 delta_i / Gamma)^2)

with s_i the local saturation parameter of the Gaussian beam profile,
s_tot the sum over all beams, and the effective detuning

    delta_i = delta_0 - k (k_i . v) - sigma_i (mu'/hbar) (k_i . B).

With red detuning and handedness signs matching the local quadrupole
gradient signs, a sigma+/sigma- pair restores the atom toward the field
zero (standard type-I MOT approximation).
"""

from __future__ import annotations

import numpy as np

from ..constants import HBAR, G_EARTH
from ..fields.bias import FieldSource, total_field
from .config import AtomSpecies, MOTConfig


def saturation_parameters(config: MOTConfig, positions: np.ndarray) -> np.ndarray:
    """Local saturation parameter s_i per beam: shape (N, 6)."""
    pts = np.atleast_2d(positions)
    out = np.empty((pts.shape[0], 6))
    for i, beam in enumerate(config.beams):
        k_hat = np.asarray(beam.direction)
        rel = pts - np.asarray(beam.center)
        along = rel @ k_hat
        rho2 = np.einsum("nk,nk->n", rel, rel) - along**2
        w = beam.waist_radius
        out[:, i] = (
            beam.peak_intensity()
            / config.saturation_intensity
            * np.exp(-2.0 * rho2 / (w * w))
        )
    return out


def _detunings(config: MOTConfig, B: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Effective per-beam detuning delta_i: shape (N, 6)."""
    k = config.k
    dirs = np.array([b.direction for b in config.beams])  # (6, 3)
    sigma = np.array([b.handedness for b in config.beams], dtype=float)
    doppler = k * (v @ dirs.T)  # (N, 6)
    zeeman = sigma[None, :] * config.zeeman_rate * (B @ dirs.T)
    return config.detuning - doppler - zeeman


def scattering_rates(
    config: MOTConfig, B: np.ndarray, v: np.ndarray, positions: np.ndarray
) -> np.ndarray:
    """Per-beam photon scattering rates (1/s): shape (N, 6)."""
    B = np.atleast_2d(B)
    v = np.atleast_2d(v)
    s = saturation_parameters(config, positions)
    s_tot = s.sum(axis=1, keepdims=True)
    delta = _detunings(config, B, v)
    gamma = config.linewidth
    return (gamma / 2.0) * s / (1.0 + s_tot + (2.0 * delta / gamma) ** 2)


def beam_scattering_forces(
    config: MOTConfig,
    species: AtomSpecies,
    B,
    v,
    positions,
) -> np.ndarray:
    """Per-beam forces (N): shape (N, 6, 3), or (6, 3) for single inputs."""
    single = np.asarray(positions).ndim == 1
    pts = np.atleast_2d(np.asarray(positions, dtype=float))
    rates = scattering_rates(
        config, np.asarray(B, dtype=float), np.asarray(v, dtype=float), pts
    )
    dirs = np.array([b.direction for b in config.beams])
    forces = HBAR * config.k * rates[:, :, None] * dirs[None, :, :]
    _ = species
    return forces[0] if single else forces


def total_force(
    config: MOTConfig,
    species: AtomSpecies,
    source: FieldSource,
    positions,
    velocities,
    time: float = 0.0,
    include_gravity: bool = False,
) -> np.ndarray:
    """Net force: sum of the six beam forces plus optional gravity.

    The magnetic dipole force on ground-state atoms is neglected in the
    MOT regime.
    """
    single = np.asarray(positions).ndim == 1
    pts = np.atleast_2d(np.asarray(positions, dtype=float))
    vel = np.atleast_2d(np.asarray(velocities, dtype=float))
    B = np.atleast_2d(total_field(source, pts, time))
    f = beam_scattering_forces(config, species, B, vel, pts).sum(axis=1)
    if include_gravity:
        f[:, 2] -= species.mass * G_EARTH
    return f[0] if single else f
