"""Ensemble time stepping: velocity-Verlet with optional photon recoil noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..constants import HBAR
from ..fields.bias import FieldSource, total_field
from .config import AtomSpecies, MOTConfig
from .forces import scattering_rates, total_force


class StepSizeError(ValueError):
    """Time step too large for the force field's spatial scale."""


def verlet_step(positions, velocities, force_fn, mass, dt, time=0.0):
    """One velocity-Verlet step for a possibly velocity-dependent force.

    force_fn(positions, velocities, time) -> forces. The end-of-step force
    is evaluated at a predicted velocity (a Heun-style closure for the
    velocity dependence); for conservative forces this is plain velocity
    Verlet.
    """
    p = np.atleast_2d(np.asarray(positions, dtype=float))
    v = np.atleast_2d(np.asarray(velocities, dtype=float))
    a0 = force_fn(p, v, time) / mass
    p_new = p + v * dt + 0.5 * a0 * dt * dt
    v_pred = v + a0 * dt
    a1 = force_fn(p_new, v_pred, time + dt) / mass
    v_new = v + 0.5 * (a0 + a1) * dt
    return p_new, v_new


@dataclass
class AtomEnsemble:
    positions: np.ndarray  # (N, 3)
    velocities: np.ndarray  # (N, 3)
    alive: np.ndarray  # (N,) bool

    @classmethod
    def create(cls, positions, velocities) -> "AtomEnsemble":
        p = np.atleast_2d(np.asarray(positions, dtype=float)).copy()
        v = np.atleast_2d(np.asarray(velocities, dtype=float)).copy()
        return cls(p, v, np.ones(p.shape[0], dtype=bool))

    @classmethod
    def thermal(
        cls,
        count: int,
        center,
        position_sigma: float,
        speed_sigma: float,
        rng: np.random.Generator,
    ) -> "AtomEnsemble":
        pos = np.asarray(center, dtype=float) + rng.normal(
            0.0, position_sigma, size=(count, 3)
        )
        vel = rng.normal(0.0, speed_sigma, size=(count, 3))
        return cls.create(pos, vel)


def _recoil_kicks(
    config: MOTConfig,
    species: AtomSpecies,
    source: FieldSource,
    p: np.ndarray,
    v: np.ndarray,
    dt: float,
    time: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Stochastic velocity kicks: Poisson photon counts per beam, one
    absorption kick along the beam plus one isotropic emission kick per
    photon, each of magnitude hbar k / m.

    The mean absorption impulse is subtracted: the deterministic force in
    the integrator already carries it, so the kicks supply only the
    zero-mean fluctuation about that mean."""
    B = np.atleast_2d(total_field(source, p, time))
    rates = scattering_rates(config, B, v, p)  # (n, 6)
    counts = rng.poisson(rates * dt)
    dirs = np.array([b.direction for b in config.beams])
    vk = HBAR * config.k / species.mass
    dv = vk * (counts - rates * dt) @ dirs

    total = counts.sum(axis=1)
    n_phot = int(total.sum())
    if n_phot:
        u = rng.normal(size=(n_phot, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        owner = np.repeat(np.arange(len(total)), total)
        for axis in range(3):
            dv[:, axis] += vk * np.bincount(
                owner, weights=u[:, axis], minlength=len(total)
            )
    return dv


def step_ensemble(
    ensemble: AtomEnsemble,
    config: MOTConfig,
    species: AtomSpecies,
    source: FieldSource,
    dt: float,
    time: float = 0.0,
    include_gravity: bool = False,
    rng: np.random.Generator | None = None,
    volume: tuple[tuple[float, float], ...] | None = None,
) -> AtomEnsemble:
    """Advance all live atoms by one step; dead atoms stay frozen.

    Atoms leaving ``volume`` are marked dead. A stability guard rejects
    steps that would move an atom more than a tenth of the beam waist.
    """
    if dt <= 0:
        raise StepSizeError(f"dt must be > 0, got {dt}")
    p = ensemble.positions.copy()
    v = ensemble.velocities.copy()
    alive = ensemble.alive.copy()

    if alive.any():
        idx = np.nonzero(alive)[0]

        def force_fn(pp, vv, tt):
            return total_force(
                config, species, source, pp, vv, tt, include_gravity
            )

        p_new, v_new = verlet_step(p[idx], v[idx], force_fn, species.mass, dt, time)
        max_move = np.linalg.norm(p_new - p[idx], axis=1).max()
        guard = min(b.waist_radius for b in config.beams) / 5.0
        if max_move > guard:
            raise StepSizeError(
                f"step moves an atom {max_move:.3g} m, beyond the stability "
                f"guard {guard:.3g} m; reduce dt"
            )
        if rng is not None:
            v_new = v_new + _recoil_kicks(
                config, species, source, p_new, v_new, dt, time + dt, rng
            )
        p[idx] = p_new
        v[idx] = v_new

    if volume is not None:
        for axis, (lo, hi) in enumerate(volume):
            alive &= (p[:, axis] >= lo) & (p[:, axis] <= hi)
    return AtomEnsemble(p, v, alive)


def step_atom(
    position,
    velocity,
    config: MOTConfig,
    species: AtomSpecies,
    source: FieldSource,
    dt: float,
    **kwargs,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Single-atom convenience wrapper around :func:`step_ensemble`."""
    ens = AtomEnsemble.create([position], [velocity])
    out = step_ensemble(ens, config, species, source, dt, **kwargs)
    return out.positions[0], out.velocities[0], bool(out.alive[0])
