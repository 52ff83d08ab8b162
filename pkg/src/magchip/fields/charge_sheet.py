"""Magnetic surface-charge backend.

An out-of-plane magnetization m(x, y) * remanence is equivalent to two
charged sheets: density +m*remanence on the top face (z = 0) and
-m*remanence on the bottom face (z = -thickness). The raster is decomposed
exactly into constant-value rectangles (run-length in x, merged across
identical rows), and each rectangle's field uses the closed-form kernel of
a uniformly charged rectangle, valid at any exterior point.
"""

from __future__ import annotations

import numpy as np

from ..pattern import MagnetizationPattern
from .slab import require_outside_slab


def charge_rectangles(pattern: MagnetizationPattern) -> np.ndarray:
    """Exact rectangle decomposition of the nonzero raster cells.

    Returns an array of rows (x1, x2, y1, y2, value) in meters / normalized
    magnetization. Adjacent raster rows with identical run structure are
    merged into taller rectangles.
    """
    film = pattern.film
    d = film.cell_size
    x0 = -film.extent[0] / 2.0
    y0 = -film.extent[1] / 2.0
    cells = pattern.cells

    def row_runs(row: np.ndarray):
        change = np.nonzero(np.diff(row))[0] + 1
        bounds = np.concatenate(([0], change, [row.size]))
        return tuple(
            (int(a), int(b), int(row[a]))
            for a, b in zip(bounds[:-1], bounds[1:])
            if row[a] != 0
        )

    rects: list[tuple[float, float, float, float, float]] = []
    open_runs: tuple = ()
    open_y = 0.0
    for j in range(cells.shape[0] + 1):
        runs = row_runs(cells[j]) if j < cells.shape[0] else ()
        if runs == open_runs:
            continue
        y_here = y0 + j * d
        for a, b, v in open_runs:
            rects.append((x0 + a * d, x0 + b * d, open_y, y_here, float(v)))
        open_runs = runs
        open_y = y_here
    return np.array(rects) if rects else np.zeros((0, 5))


def rectangle_sheet_field(
    x1, x2, y1, y2, sigma, z0: float, points: np.ndarray
) -> np.ndarray:
    """Field (T) of uniformly charged rectangles at z = z0.

    ``sigma`` is the charge density expressed directly in tesla (i.e.
    mu0 * magnetic surface charge). Rectangle parameters are 1-D arrays of
    equal length; points has shape (N, 3). Exact closed form:

        Bx = -(sigma/4pi) sum_corners s * ln(Y + R)
        By = -(sigma/4pi) sum_corners s * ln(X + R)
        Bz =  (sigma/4pi) sum_corners s * atan2(X*Y, Z*R)

    with X = x - x_corner, Y = y - y_corner, Z = z - z0 and corner signs
    s = +1 for (x1,y1), (x2,y2) and -1 for (x1,y2), (x2,y1).
    """
    x1 = np.asarray(x1)[None, :]
    x2 = np.asarray(x2)[None, :]
    y1 = np.asarray(y1)[None, :]
    y2 = np.asarray(y2)[None, :]
    sigma = np.asarray(sigma)[None, :]
    px = points[:, 0:1]
    py = points[:, 1:2]
    Z = points[:, 2:3] - z0

    bx = np.zeros((points.shape[0], x1.shape[1]))
    by = np.zeros_like(bx)
    bz = np.zeros_like(bx)
    for xc, sx in ((x1, 1.0), (x2, -1.0)):
        X = px - xc
        for yc, sy in ((y1, 1.0), (y2, -1.0)):
            s = sx * sy
            Y = py - yc
            R = np.sqrt(X * X + Y * Y + Z * Z)
            bx += s * np.log(Y + R)
            by += s * np.log(X + R)
            bz += s * np.arctan2(X * Y, Z * R)
    pref = sigma / (4.0 * np.pi)
    out = np.empty((points.shape[0], 3))
    out[:, 0] = np.sum(pref * -bx, axis=1)
    out[:, 1] = np.sum(pref * -by, axis=1)
    out[:, 2] = np.sum(pref * bz, axis=1)
    return out


def field_charge_sheet(pattern: MagnetizationPattern, points) -> np.ndarray:
    """Pattern field (T) at points outside the slab, via surface charges."""
    single = np.asarray(points).ndim == 1
    pts = require_outside_slab(points, pattern.film.thickness)
    rects = _rect_cache(pattern)
    out = np.zeros((pts.shape[0], 3))
    if rects.shape[0]:
        x1, x2, y1, y2, val = rects.T
        sigma = val * pattern.film.remanence
        # chunk over points to bound the (points x rects) workspace
        chunk = max(1, 4_000_000 // rects.shape[0])
        for lo in range(0, pts.shape[0], chunk):
            p = pts[lo : lo + chunk]
            top = rectangle_sheet_field(x1, x2, y1, y2, sigma, 0.0, p)
            bot = rectangle_sheet_field(
                x1, x2, y1, y2, -sigma, -pattern.film.thickness, p
            )
            out[lo : lo + chunk] = top + bot
    return out[0] if single else out


_RECT_CACHE: dict[int, tuple] = {}


def _rect_cache(pattern: MagnetizationPattern) -> np.ndarray:
    key = id(pattern.cells)
    hit = _RECT_CACHE.get(key)
    if hit is None:
        if len(_RECT_CACHE) > 32:
            _RECT_CACHE.clear()
        _RECT_CACHE[key] = hit = (pattern.cells, charge_rectangles(pattern))
    return hit[1]
