"""Planar shape primitives used to define magnetization edits.

Shapes decide raster-cell membership by cell center (no antialiasing).
All coordinates are meters in the film plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Raised for geometrically invalid shape parameters."""


@dataclass(frozen=True)
class Disk:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ShapeError(f"disk radius must be > 0, got {self.radius}")

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 <= self.radius**2

    def bounds(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)


@dataclass(frozen=True)
class Rectangle:
    corner: tuple[float, float]  # lower-left corner
    size: tuple[float, float]

    def __post_init__(self):
        if self.size[0] <= 0 or self.size[1] <= 0:
            raise ShapeError(f"rectangle sides must be > 0, got {self.size}")

    def contains(self, x, y):
        x0, y0 = self.corner
        sx, sy = self.size
        return (x >= x0) & (x <= x0 + sx) & (y >= y0) & (y <= y0 + sy)

    def bounds(self):
        x0, y0 = self.corner
        sx, sy = self.size
        return (x0, y0, x0 + sx, y0 + sy)


@dataclass(frozen=True)
class Annulus:
    center: tuple[float, float]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if self.r_inner <= 0 or self.r_outer <= 0:
            raise ShapeError("annulus radii must be > 0")
        if self.r_outer <= self.r_inner:
            raise ShapeError(
                f"annulus needs r_outer > r_inner, got {self.r_inner} >= {self.r_outer}"
            )

    def contains(self, x, y):
        r2 = (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2
        return (r2 >= self.r_inner**2) & (r2 <= self.r_outer**2)

    def bounds(self):
        cx, cy = self.center
        r = self.r_outer
        return (cx - r, cy - r, cx + r, cy + r)


@dataclass(frozen=True)
class Stroke:
    """A polyline swept with a round brush of the given width."""

    polyline: tuple[tuple[float, float], ...]
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ShapeError(f"stroke width must be > 0, got {self.width}")
        if len(self.polyline) < 2:
            raise ShapeError("stroke polyline needs at least 2 vertices")
        object.__setattr__(self, "polyline", tuple(tuple(p) for p in self.polyline))

    def contains(self, x, y):
        half = self.width / 2.0
        inside = np.zeros(np.shape(x), dtype=bool)
        pts = np.asarray(self.polyline)
        for a, b in zip(pts[:-1], pts[1:]):
            ab = b - a
            ab2 = float(ab @ ab)
            px = x - a[0]
            py = y - a[1]
            if ab2 == 0.0:
                d2 = px**2 + py**2
            else:
                t = np.clip((px * ab[0] + py * ab[1]) / ab2, 0.0, 1.0)
                d2 = (px - t * ab[0]) ** 2 + (py - t * ab[1]) ** 2
            inside |= d2 <= half**2
        return inside

    def bounds(self):
        pts = np.asarray(self.polyline)
        half = self.width / 2.0
        return (
            pts[:, 0].min() - half,
            pts[:, 1].min() - half,
            pts[:, 0].max() + half,
            pts[:, 1].max() + half,
        )


Shape = Disk | Rectangle | Annulus | Stroke
