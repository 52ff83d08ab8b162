"""Field sources: pattern + uniform (modulated) bias + auxiliary quadrupole."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..pattern import MagnetizationPattern
from .charge_sheet import field_charge_sheet
from .edge_current import field_edge_current


@dataclass(frozen=True)
class Modulation:
    """Sinusoidal modulation of the bias components.

    Evaluation at time t adds (A_x sin(wt + phi_x), A_y sin(wt + phi_y),
    A_z sin(wt + phi_z)) to the static bias.
    """

    amplitude: tuple[float, float, float]  # T, per component, >= 0
    angular_frequency: float  # rad / s
    phase: tuple[float, float, float] = (0.0, 0.0, 0.0)  # rad

    def __post_init__(self):
        if any(a < 0 for a in self.amplitude):
            raise ValueError(f"modulation amplitudes must be >= 0, got {self.amplitude}")

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.angular_frequency


@dataclass(frozen=True)
class BiasField:
    static: tuple[float, float, float] = (0.0, 0.0, 0.0)  # T
    modulation: Modulation | None = None

    def evaluate(self, time: float = 0.0) -> np.ndarray:
        b = np.asarray(self.static, dtype=float)
        if self.modulation is not None:
            m = self.modulation
            b = b + np.asarray(m.amplitude) * np.sin(
                m.angular_frequency * time + np.asarray(m.phase)
            )
        return b


@dataclass(frozen=True)
class AuxQuadrupole:
    """Large-extent analytic quadrupole (external anti-Helmholtz coils).

    B = g * (-(x-x0)/2, -(y-y0)/2, (z-z0)) with g the axial gradient.
    """

    center: tuple[float, float, float]  # m
    axial_gradient: float  # T / m

    def __post_init__(self):
        if not np.isfinite(self.axial_gradient):
            raise ValueError("aux quadrupole gradient must be finite")

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rel = pts - np.asarray(self.center)
        g = self.axial_gradient
        out = np.empty_like(rel)
        out[:, 0] = -g / 2.0 * rel[:, 0]
        out[:, 1] = -g / 2.0 * rel[:, 1]
        out[:, 2] = g * rel[:, 2]
        return out


BACKENDS = ("edge", "sheet", "spectral")


@dataclass(frozen=True)
class FieldSource:
    pattern: MagnetizationPattern | None = None
    bias: BiasField = field(default_factory=BiasField)
    aux_quadrupole: AuxQuadrupole | None = None
    backend: str = "edge"
    include_extent_boundary: bool = True
    # Optional cached interpolator for the pattern field (built lazily by
    # consumers that need many evaluations, e.g. the MOT integrator).
    pattern_cache: object = None

    def __post_init__(self):
        if self.backend not in ("edge", "sheet"):
            raise ValueError(
                f"point-evaluation backend must be 'edge' or 'sheet', got {self.backend!r}"
            )

    def with_bias(self, bias: BiasField) -> "FieldSource":
        from dataclasses import replace

        return replace(self, bias=bias)

    def pattern_field(self, points) -> np.ndarray:
        if self.pattern_cache is not None:
            return self.pattern_cache.evaluate(points)
        if self.pattern is None:
            pts = np.atleast_2d(np.asarray(points, dtype=float))
            out = np.zeros_like(pts)
            return out[0] if np.asarray(points).ndim == 1 else out
        if self.backend == "sheet":
            return field_charge_sheet(self.pattern, points)
        return field_edge_current(
            self.pattern, points, include_extent_boundary=self.include_extent_boundary
        )


def total_field(source: FieldSource, points, time: float = 0.0) -> np.ndarray:
    """Superposed field (T): pattern + bias(time) + auxiliary quadrupole."""
    single = np.asarray(points).ndim == 1
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.atleast_2d(source.pattern_field(pts)).astype(float).copy()
    out += source.bias.evaluate(time)[None, :]
    if source.aux_quadrupole is not None:
        out += source.aux_quadrupole.evaluate(pts)
    return out[0] if single else out
