"""Closed-form and quadrature oracles used for calibration and validation."""

from __future__ import annotations

import numpy as np


def on_axis_disk_oracle(contrast: float, radius: float, thickness: float, z) -> np.ndarray:
    """On-axis B_z of a uniformly magnetized disk domain (two charged faces).

    ``contrast`` is the flux-density jump of the domain against its
    surroundings (a reversed domain in a saturated film has contrast
    2 x remanence). ``z`` is measured from the top film surface, z >= 0.

    B_z(z) = (contrast/2) [ (z+t)/sqrt((z+t)^2+R^2) - z/sqrt(z^2+R^2) ]
    """
    if radius <= 0:
        raise ValueError(f"disk radius must be > 0, got {radius}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("on-axis oracle requires z >= 0")
    zt = z + thickness
    return (contrast / 2.0) * (zt / np.hypot(zt, radius) - z / np.hypot(z, radius))


def calibrated_disk_radius(
    target_bz: float, contrast: float, thickness: float
) -> float:
    """Invert the z = 0 on-axis formula for the disk radius.

    B_z(0) = (contrast/2) * t / sqrt(t^2 + R^2), solved for R.
    """
    ratio = 2.0 * target_bz / contrast
    if not 0 < ratio < 1:
        raise ValueError("target field not reachable for this contrast")
    return thickness * np.sqrt(1.0 / ratio**2 - 1.0)


def on_axis_rectangle_quadrature(
    contrast: float,
    half_x: float,
    half_y: float,
    thickness: float,
    z,
    n: int = 400,
) -> np.ndarray:
    """On-axis B_z of a rectangular domain by brute-force midpoint quadrature.

    Independent check for the analytic backends; deliberately naive.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    xs = (np.arange(n) + 0.5) / n * 2 * half_x - half_x
    ys = (np.arange(n) + 0.5) / n * 2 * half_y - half_y
    dA = (2 * half_x / n) * (2 * half_y / n)
    xx, yy = np.meshgrid(xs, ys)
    rho2 = (xx**2 + yy**2).ravel()
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        top = zi / (rho2 + zi**2) ** 1.5
        bot = (zi + thickness) / (rho2 + (zi + thickness) ** 2) ** 1.5
        # top face carries +contrast, bottom face -contrast
        out[i] = (contrast / (4 * np.pi)) * dA * (top.sum() - bot.sum())
    return out if out.size > 1 else out[0]
