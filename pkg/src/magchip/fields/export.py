"""Delimited and image export formats for field grids and trap lists."""

from __future__ import annotations

import io

import numpy as np

GRID_HEADER = "x_m,y_m,z_m,Bx_T,By_T,Bz_T"
TRAP_HEADER = "time_s,x_m,y_m,z_m,Bres_T,g1_Tpm,g2_Tpm,g3_Tpm,class,depth_T"
TRAJECTORY_HEADER = "t_s,atom_id,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,alive"


def _fmt(x: float) -> str:
    # >= 9 significant digits, decimal notation
    return f"{x:.9e}"


def grid_csv(points: np.ndarray, B: np.ndarray) -> str:
    """Row-major field grid CSV: positions (N, 3) and fields (N, 3)."""
    buf = io.StringIO()
    buf.write(GRID_HEADER + "\n")
    for p, b in zip(points, B):
        buf.write(",".join(_fmt(v) for v in (*p, *b)) + "\n")
    return buf.getvalue()


def traps_csv(traps, depths=None) -> str:
    buf = io.StringIO()
    buf.write(TRAP_HEADER + "\n")
    for i, t in enumerate(traps):
        depth = t.depth
        if depths is not None:
            depth = depths[i]
        g = t.principal_gradients
        row = [
            _fmt(t.time),
            *(_fmt(v) for v in t.position),
            _fmt(t.residual_B),
            *(_fmt(v) for v in g),
            t.classification,
            _fmt(depth) if np.isfinite(depth) else "nan",
        ]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def trajectory_csv(times, positions, velocities, alive) -> str:
    """times (n,), positions/velocities (n, N, 3), alive (n, N)."""
    buf = io.StringIO()
    buf.write(TRAJECTORY_HEADER + "\n")
    for ti, t in enumerate(times):
        for a in range(positions.shape[1]):
            row = [
                _fmt(t),
                str(a),
                *(_fmt(v) for v in positions[ti, a]),
                *(_fmt(v) for v in velocities[ti, a]),
                "1" if alive[ti, a] else "0",
            ]
            buf.write(",".join(row) + "\n")
    return buf.getvalue()


def magnitude_pgm(values: np.ndarray) -> tuple[bytes, str]:
    """|B| heatmap as binary P5 plus a sidecar describing the linear scale.

    Returns (pgm_bytes, sidecar_text).
    """
    v = np.asarray(values, dtype=float)
    vmin = float(v.min())
    vmax = float(v.max())
    span = vmax - vmin if vmax > vmin else 1.0
    gray = np.rint((v - vmin) / span * 255.0).astype(np.uint8)
    ny, nx = gray.shape
    header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
    sidecar = (
        "linear scale: gray = round(255 * (value - vmin) / (vmax - vmin))\n"
        f"vmin_T {_fmt(vmin)}\nvmax_T {_fmt(vmax)}\n"
    )
    return header + gray.tobytes(), sidecar
