"""Cached pattern-field interpolator for evaluation-heavy consumers.

The MOT integrator evaluates the pattern field millions of times inside a
small box around a trap. The pattern field is static, so it is sampled
once on a regular 3-D grid (with the exact point backend) and then read
through trilinear interpolation. Bias and auxiliary-quadrupole terms stay
analytic and are added outside the cache.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..pattern import MagnetizationPattern
from .edge_current import field_edge_current


@dataclass
class CachedPatternField:
    grid_x: np.ndarray
    grid_y: np.ndarray
    grid_z: np.ndarray
    values: np.ndarray  # (nx, ny, nz, 3)

    def __post_init__(self):
        self._interp = RegularGridInterpolator(
            (self.grid_x, self.grid_y, self.grid_z),
            self.values,
            bounds_error=False,
            fill_value=None,
        )

    @classmethod
    def build(
        cls,
        pattern: MagnetizationPattern,
        box: tuple[tuple[float, float], tuple[float, float], tuple[float, float]],
        resolution: tuple[int, int, int] = (33, 33, 33),
        include_extent_boundary: bool = True,
    ) -> "CachedPatternField":
        axes = [
            np.linspace(lo, hi, n)
            for (lo, hi), n in zip(box, resolution)
        ]
        xx, yy, zz = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)
        vals = field_edge_current(
            pattern, pts, include_extent_boundary=include_extent_boundary
        ).reshape(*[len(a) for a in axes], 3)
        return cls(axes[0], axes[1], axes[2], vals)

    def evaluate(self, points) -> np.ndarray:
        single = np.asarray(points).ndim == 1
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = self._interp(pts)
        return out[0] if single else out
