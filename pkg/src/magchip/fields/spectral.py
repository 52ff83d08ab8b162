"""Planar spectral (FFT) backend for fast field grids at fixed height.

For a thin film with out-of-plane surface flux density B_s(x, y) the field
above the film has the plane-wave solution

    Bz_hat(k, z) = 1/2 * Bs_hat(k) * (1 - exp(-|k| t)) * exp(-|k| z)
    Bx_hat, By_hat = -i k_{x,y} / |k| * Bz_hat

(the in-plane sign follows from div B = 0 with the e^{+ikx} synthesis
convention of the inverse FFT)

with z measured from the top film surface and the k = 0 component dropped
(an infinite uniform sheet produces no exterior field). Periodic
wrap-around is suppressed by zero-padding the raster by at least 2x.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..pattern import MagnetizationPattern


class SpectralDomainError(ValueError):
    """Evaluation outside the spectral backend's validity domain."""


def spectral_plane(
    pattern: MagnetizationPattern,
    z: float,
    pad_factor: int = 2,
    crop: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Field on the pattern's own cell-center grid at height z.

    Returns (x, y, B) with x (nx,), y (ny,) cell-center coordinates and
    B of shape (ny, nx, 3). With ``crop=False`` the full zero-padded
    plane is returned (for transform-identity checks).
    """
    film = pattern.film
    if z < film.thickness / 2.0:
        raise SpectralDomainError(
            f"spectral backend valid for z >= thickness/2, got z = {z:g}"
        )
    if pad_factor < 2:
        raise ValueError("zero-padding factor must be >= 2")
    ny, nx = pattern.cells.shape
    bs = pattern.cells.astype(float) * film.remanence
    pad_y, pad_x = pad_factor * ny, pad_factor * nx
    bs_hat = np.fft.fft2(bs, s=(pad_y, pad_x))

    d = film.cell_size
    kx = 2.0 * np.pi * np.fft.fftfreq(pad_x, d)[None, :]
    ky = 2.0 * np.pi * np.fft.fftfreq(pad_y, d)[:, None]
    k = np.hypot(kx, ky)
    with np.errstate(divide="ignore", invalid="ignore"):
        transfer = 0.5 * (1.0 - np.exp(-k * film.thickness)) * np.exp(-k * z)
        ux = np.where(k > 0, kx / k, 0.0)
        uy = np.where(k > 0, ky / k, 0.0)
    bz_hat = bs_hat * transfer
    bz_hat[0, 0] = 0.0
    bx_hat = -1j * ux * bz_hat
    by_hat = -1j * uy * bz_hat

    out_y, out_x = (ny, nx) if crop else (pad_y, pad_x)
    B = np.empty((out_y, out_x, 3))
    B[:, :, 0] = np.fft.ifft2(bx_hat).real[:out_y, :out_x]
    B[:, :, 1] = np.fft.ifft2(by_hat).real[:out_y, :out_x]
    B[:, :, 2] = np.fft.ifft2(bz_hat).real[:out_y, :out_x]
    if crop:
        x, y = film.cell_centers()
    else:
        d = film.cell_size
        x = (np.arange(pad_x) + 0.5) * d - film.extent[0] / 2.0
        y = (np.arange(pad_y) + 0.5) * d - film.extent[1] / 2.0
    return x, y, B


def field_spectral_grid(
    pattern: MagnetizationPattern,
    z: float,
    grid_x: np.ndarray,
    grid_y: np.ndarray,
    pad_factor: int = 2,
) -> np.ndarray:
    """Field (T) on the requested planar grid at height z above the film.

    ``grid_x`` and ``grid_y`` are 1-D coordinate arrays inside the film
    extent; the result has shape (len(grid_y), len(grid_x), 3), evaluated
    by bilinear interpolation from the pattern's cell grid.
    """
    film = pattern.film
    gx = np.asarray(grid_x, dtype=float)
    gy = np.asarray(grid_y, dtype=float)
    hx, hy = film.extent[0] / 2.0, film.extent[1] / 2.0
    if gx.min() < -hx or gx.max() > hx or gy.min() < -hy or gy.max() > hy:
        raise SpectralDomainError("requested grid extends beyond the film extent")
    x, y, B = spectral_plane(pattern, z, pad_factor=pad_factor)
    interp = RegularGridInterpolator(
        (y, x), B, bounds_error=False, fill_value=None
    )
    yy, xx = np.meshgrid(gy, gx, indexing="ij")
    pts = np.stack([yy.ravel(), xx.ravel()], axis=-1)
    return interp(pts).reshape(len(gy), len(gx), 3)
