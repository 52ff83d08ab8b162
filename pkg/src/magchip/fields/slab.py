"""Film-slab domain checks shared by all backends."""

from __future__ import annotations

import numpy as np


class SlabError(ValueError):
    """Evaluation point inside (or on) the film slab."""


def require_outside_slab(points: np.ndarray, thickness: float) -> np.ndarray:
    """Validate that all points lie strictly outside the slab [-t, 0].

    Returns the points as a float array of shape (N, 3).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected points of shape (N, 3), got {pts.shape}")
    z = pts[:, 2]
    inside = (z >= -thickness) & (z <= 0.0)
    if inside.any():
        bad = pts[inside][0]
        raise SlabError(
            f"evaluation point {bad.tolist()} lies inside the film slab "
            f"[-{thickness:g}, 0]"
        )
    return pts
