"""MOT beam geometry, light parameters and atomic species data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import constants


@dataclass(frozen=True)
class AtomSpecies:
    mass: float  # kg
    wavelength: float  # m
    linewidth: float  # rad/s
    zeeman_rate: float  # rad/(s T), effective mu'/hbar

    def __post_init__(self):
        for name in ("mass", "wavelength", "linewidth", "zeeman_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"species {name} must be > 0")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength


def rb85() -> AtomSpecies:
    return AtomSpecies(
        mass=constants.RB85_MASS,
        wavelength=constants.RB85_WAVELENGTH,
        linewidth=constants.RB85_LINEWIDTH,
        zeeman_rate=constants.RB85_ZEEMAN_RATE,
    )


@dataclass(frozen=True)
class Beam:
    direction: tuple[float, float, float]  # unit propagation direction
    handedness: int  # sigma in {+1, -1}
    power: float  # W
    waist_diameter_1e2: float  # m
    # axis point the beam passes through; beams intersect at the trap site
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("beam direction must be nonzero")
        object.__setattr__(self, "direction", tuple(d / n))
        if self.handedness not in (-1, 1):
            raise ValueError(f"handedness must be +-1, got {self.handedness}")
        if self.power < 0:
            raise ValueError("beam power must be >= 0")
        if self.waist_diameter_1e2 <= 0:
            raise ValueError("beam diameter must be > 0")

    @property
    def waist_radius(self) -> float:
        return self.waist_diameter_1e2 / 2.0

    def peak_intensity(self) -> float:
        w = self.waist_radius
        return 2.0 * self.power / (math.pi * w * w)


@dataclass(frozen=True)
class MOTConfig:
    beams: tuple[Beam, ...]
    detuning: float  # rad/s, negative = red
    wavelength: float
    linewidth: float
    saturation_intensity: float  # W/m^2
    zeeman_rate: float  # rad/(s T)

    def __post_init__(self):
        if len(self.beams) != 6:
            raise ValueError(f"need exactly 6 beams, got {len(self.beams)}")
        dirs = np.array([b.direction for b in self.beams])
        # three counter-propagating pairs: (0,1), (2,3), (4,5)
        for i in (0, 2, 4):
            if not np.allclose(dirs[i] + dirs[i + 1], 0.0, atol=1e-12):
                raise ValueError(f"beams {i} and {i + 1} are not counter-propagating")
        if self.detuning >= 0:
            raise ValueError("detuning must be negative (red) for cooling")
        if self.saturation_intensity <= 0:
            raise ValueError("saturation_intensity must be > 0")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength


def six_beam_config(
    species: AtomSpecies | None = None,
    power: float = 20e-3,
    waist_diameter_1e2: float = 10e-3,
    detuning: float | None = None,
    center: tuple[float, float, float] = (0.0, 0.0, 0.0),
    axial_gradient_sign: int = 1,
    saturation_intensity: float = constants.RB85_SATURATION_INTENSITY,
    film_absorption: float = 0.0,
) -> MOTConfig:
    """Standard retro-reflected six-beam configuration about ``center``.

    Handedness follows the local quadrupole orientation: the pair along the
    axial-gradient axis (z) gets sigma = sign of the axial gradient, the
    transverse pairs the opposite sign, which makes the scattering force
    restoring around the zero. ``film_absorption`` attenuates the
    retro-reflected leg of the through-chip (z) pair.
    """
    sp = species if species is not None else rb85()
    if detuning is None:
        detuning = -sp.linewidth  # red-detuned by one linewidth
    s_ax = int(axial_gradient_sign)
    s_tr = -s_ax
    retro_factor = 1.0 - film_absorption
    beams = (
        Beam((1, 0, 0), s_tr, power, waist_diameter_1e2, center),
        Beam((-1, 0, 0), s_tr, power, waist_diameter_1e2, center),
        Beam((0, 1, 0), s_tr, power, waist_diameter_1e2, center),
        Beam((0, -1, 0), s_tr, power, waist_diameter_1e2, center),
        Beam((0, 0, 1), s_ax, power, waist_diameter_1e2, center),
        Beam((0, 0, -1), s_ax, power * retro_factor, waist_diameter_1e2, center),
    )
    return MOTConfig(
        beams=beams,
        detuning=detuning,
        wavelength=sp.wavelength,
        linewidth=sp.linewidth,
        saturation_intensity=saturation_intensity,
        zeeman_rate=sp.zeeman_rate,
    )
