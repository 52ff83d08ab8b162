"""Magnetization raster of the hard ferrite-garnet film and its edit semantics.

The film holds a three-state out-of-plane magnetization per raster cell:
-1, 0, +1 (normalized; physical flux density is m * remanence). Edits are
laser-written shapes; the applied write field's sign decides the recorded
state, and a zero write field records a demagnetized (m = 0) region.

Patterns are immutable values: every edit returns a new pattern and appends
to the edit log, so replaying the log from a uniform raster reproduces the
cells exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Shape, Stroke

# Power needed to write a line of the reference width (calibration knob).
REFERENCE_WRITE_POWER = 10e-3  # W
REFERENCE_WRITE_WIDTH = 10e-6  # m


class FilmSpecError(ValueError):
    """Invalid film specification; message names the offending field."""


class EditError(ValueError):
    """Invalid edit operation."""


def power_threshold(feature_width: float) -> float:
    """Minimum beam power to write a feature of the given width.

    Linear in the written linewidth, anchored to the single calibration
    point of 10 mW for 10 um lines.
    """
    return REFERENCE_WRITE_POWER * (feature_width / REFERENCE_WRITE_WIDTH)


@dataclass(frozen=True)
class FilmSpec:
    thickness: float  # m
    remanence: float  # T, remanent out-of-plane flux density
    coercive_field: float  # T
    extent: tuple[float, float]  # (Lx, Ly) in m, centered on the origin
    cell_size: float  # m

    def __post_init__(self):
        if self.thickness <= 0:
            raise FilmSpecError(f"thickness must be > 0, got {self.thickness}")
        if self.remanence <= 0:
            raise FilmSpecError(f"remanence must be > 0, got {self.remanence}")
        if self.coercive_field <= 0:
            raise FilmSpecError(f"coercive_field must be > 0, got {self.coercive_field}")
        if self.cell_size <= 0:
            raise FilmSpecError(f"cell_size must be > 0, got {self.cell_size}")
        if min(self.extent) < 10 * self.cell_size:
            raise FilmSpecError(
                f"extent sides {self.extent} must each be >= 10 x cell_size"
            )

    @property
    def shape(self) -> tuple[int, int]:
        """Raster dimensions (ny, nx) = round(extent / cell_size)."""
        nx = int(round(self.extent[0] / self.cell_size))
        ny = int(round(self.extent[1] / self.cell_size))
        return ny, nx

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """1-D arrays of cell-center x and y coordinates."""
        ny, nx = self.shape
        dx = self.cell_size
        x = (np.arange(nx) + 0.5) * dx - self.extent[0] / 2.0
        y = (np.arange(ny) + 0.5) * dx - self.extent[1] / 2.0
        return x, y


def default_film() -> FilmSpec:
    """The reference 1.8 um garnet film: 20 mT remanence, 4x4 mm, 2 um cells."""
    return FilmSpec(
        thickness=1.8e-6,
        remanence=20e-3,
        coercive_field=10e-3,
        extent=(4e-3, 4e-3),
        cell_size=2e-6,
    )


@dataclass(frozen=True)
class EditOp:
    kind: str  # "stamp" or "scan"
    shape: Shape
    write_field_sign: int  # -1, 0, +1
    beam_power: float  # W
    spot_diameter: float  # m

    def __post_init__(self):
        if self.kind not in ("stamp", "scan"):
            raise EditError(f"unknown edit kind {self.kind!r}")
        if self.write_field_sign not in (-1, 0, 1):
            raise EditError(f"write_field_sign must be -1, 0 or +1, got {self.write_field_sign}")
        if self.beam_power < 0:
            raise EditError(f"beam_power must be >= 0, got {self.beam_power}")
        if self.spot_diameter <= 0:
            raise EditError(f"spot_diameter must be > 0, got {self.spot_diameter}")

    @property
    def feature_width(self) -> float:
        """Width that sets the write-power threshold for this edit."""
        if self.kind == "scan" and isinstance(self.shape, Stroke):
            return self.shape.width
        return self.spot_diameter

    @property
    def writes(self) -> bool:
        """Whether the beam carries enough power to actually write."""
        return self.beam_power >= power_threshold(self.feature_width)


@dataclass(frozen=True)
class MagnetizationPattern:
    film: FilmSpec
    cells: np.ndarray  # int8, shape (ny, nx), values in {-1, 0, +1}
    edit_log: tuple[EditOp, ...] = ()

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=np.int8)
        if cells.shape != self.film.shape:
            raise EditError(
                f"raster shape {cells.shape} does not match film {self.film.shape}"
            )
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    def physical_magnetization(self) -> np.ndarray:
        """Out-of-plane remanent flux density per cell (T)."""
        return self.cells.astype(float) * self.film.remanence


def create_uniform(film: FilmSpec, polarity: int) -> MagnetizationPattern:
    """A uniformly magnetized film with an empty edit log."""
    if polarity not in (-1, 1):
        raise EditError(f"polarity must be -1 or +1, got {polarity}")
    cells = np.full(film.shape, polarity, dtype=np.int8)
    return MagnetizationPattern(film=film, cells=cells)


def _edit_mask(film: FilmSpec, shape: Shape) -> np.ndarray:
    x, y = film.cell_centers()
    xmin, ymin, xmax, ymax = shape.bounds()
    if (
        xmax < x[0] - film.cell_size
        or xmin > x[-1] + film.cell_size
        or ymax < y[0] - film.cell_size
        or ymin > y[-1] + film.cell_size
    ):
        raise EditError("edit shape lies entirely outside the film extent")
    # Restrict the membership test to the shape's bounding box of rows/cols.
    ix = np.nonzero((x >= xmin) & (x <= xmax))[0]
    iy = np.nonzero((y >= ymin) & (y <= ymax))[0]
    mask = np.zeros(film.shape, dtype=bool)
    if ix.size and iy.size:
        xx, yy = np.meshgrid(x[ix], y[iy])
        sub = shape.contains(xx, yy)
        mask[np.ix_(iy, ix)] = sub
    if not mask.any():
        raise EditError("edit shape covers no cell centers inside the film extent")
    return mask


def apply_edit(pattern: MagnetizationPattern, op: EditOp) -> MagnetizationPattern:
    """Apply a stamp or scan edit; under-powered edits are logged no-ops."""
    mask = _edit_mask(pattern.film, op.shape)  # validates geometry regardless
    log = pattern.edit_log + (op,)
    if not op.writes:
        return replace(pattern, edit_log=log)
    cells = np.array(pattern.cells, dtype=np.int8)
    cells[mask] = op.write_field_sign
    return MagnetizationPattern(film=pattern.film, cells=cells, edit_log=log)


def scan_stroke(
    pattern: MagnetizationPattern,
    polyline,
    width: float,
    power: float,
    write_field_sign: int,
    spot_diameter: float | None = None,
) -> tuple[MagnetizationPattern, bool]:
    """Sweep the write beam along a polyline.

    Returns (pattern, wrote). An under-powered beam leaves the raster
    unchanged and reports wrote=False; the attempt is still logged.
    """
    op = EditOp(
        kind="scan",
        shape=Stroke(polyline=tuple(tuple(p) for p in polyline), width=width),
        write_field_sign=write_field_sign,
        beam_power=power,
        spot_diameter=spot_diameter if spot_diameter is not None else width,
    )
    return apply_edit(pattern, op), op.writes


def replay(film: FilmSpec, polarity: int, edit_log) -> MagnetizationPattern:
    """Rebuild a pattern from scratch by replaying its edit log."""
    pattern = create_uniform(film, polarity)
    for op in edit_log:
        pattern = apply_edit(pattern, op)
    return pattern


def faraday_image(pattern: MagnetizationPattern) -> np.ndarray:
    """Grayscale view of the raster, as polarization microscopy would show it.

    Monotone map m in {-1, 0, +1} -> gray in {0.0, 0.5, 1.0}.
    """
    return (pattern.cells.astype(float) + 1.0) / 2.0


def to_pgm(pattern: MagnetizationPattern) -> bytes:
    """Binary PGM (P5, maxval 255) dump of the raster, gray = round(127.5*(m+1))."""
    gray = np.rint(127.5 * (pattern.cells.astype(float) + 1.0)).astype(np.uint8)
    ny, nx = gray.shape
    header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
    return header + gray.tobytes()
