"""Locating and characterizing magnetic-field zeros (quadrupole micro-traps).

Zeros of |B| are found by multi-start trust-region least squares on the
three field components, classified via the symmetrized field-gradient
tensor, and followed in time under bias modulation to trace trap
transport. Trap depth is the |B| level at which the zero's sub-level
region first connects to the search-box boundary (graded flood fill).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .fields.bias import FieldSource, total_field

DEFAULT_ZERO_TOLERANCE = 10e-9  # T
MERGE_RADIUS = 5e-6  # m


class SearchRegionError(ValueError):
    """Invalid trap-search region."""


@dataclass(frozen=True)
class SearchRegion:
    box: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    seed_grid: tuple[int, int, int] = (4, 4, 6)
    zero_tolerance: float = DEFAULT_ZERO_TOLERANCE
    max_iterations: int = 100

    def __post_init__(self):
        for lo, hi in self.box:
            if not hi > lo:
                raise SearchRegionError(f"degenerate box interval ({lo}, {hi})")
        if any(n < 2 for n in self.seed_grid):
            raise SearchRegionError("need at least 2 seeds per axis")

    def validate_above_film(self, thickness: float):
        if self.box[2][0] < thickness / 2.0:
            raise SearchRegionError(
                f"search box must start above the film (z_min >= {thickness / 2.0:g})"
            )

    def seeds(self) -> np.ndarray:
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.box, self.seed_grid)]
        xx, yy, zz = np.meshgrid(*axes, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)

    def contains(self, p: np.ndarray, margin: float = 0.0) -> bool:
        return all(
            lo - margin <= v <= hi + margin for v, (lo, hi) in zip(p, self.box)
        )


@dataclass(frozen=True)
class TrapCandidate:
    position: np.ndarray  # (3,) m
    time: float
    residual_B: float  # |B| at the converged point (T)
    gradient_tensor: np.ndarray  # (3, 3) T/m
    principal_gradients: np.ndarray  # (3,) eigenvalues, T/m
    classification: str  # quadrupole_3d | degenerate_line | not_a_trap
    depth: float = float("nan")  # T, filled by trap_depth when requested


def jacobian(
    source: FieldSource, position, time: float = 0.0, step: float = 1e-6
) -> np.ndarray:
    """Field-gradient tensor dB_i/dx_j by Richardson-extrapolated central
    differences (steps h and h/2)."""
    p = np.asarray(position, dtype=float)
    thickness = source.pattern.film.thickness if source.pattern is not None else 0.0

    h = step
    while p[2] - h <= 0.0 and p[2] > 0.0:
        # shrink the step rather than cross into the film
        h /= 2.0
        if h < 1e-9:
            raise ValueError("cannot take a finite-difference step outside the film")

    def central(hh: float) -> np.ndarray:
        cols = []
        for axis in range(3):
            e = np.zeros(3)
            e[axis] = hh
            bp = total_field(source, p + e, time)
            bm = total_field(source, p - e, time)
            cols.append((bp - bm) / (2.0 * hh))
        return np.stack(cols, axis=-1)

    d1 = central(h)
    d2 = central(h / 2.0)
    _ = thickness
    return (4.0 * d2 - d1) / 3.0


def classify(grad: np.ndarray, zero_tolerance_gradient: float = 1e-4) -> tuple[np.ndarray, str]:
    """Principal gradients (eigenvalues of the symmetrized tensor) and class."""
    sym = 0.5 * (grad + grad.T)
    eig = np.linalg.eigvalsh(sym)
    scale = np.abs(eig).max()
    if scale == 0.0:
        return eig, "not_a_trap"
    small = np.abs(eig) < 0.05 * scale
    if small.sum() == 0:
        cls = "quadrupole_3d"
    elif small.sum() == 1:
        cls = "degenerate_line"
    else:
        cls = "not_a_trap"
    return eig, cls


def _refine_zero(source, seed, time, region) -> np.ndarray | None:
    scale = max(abs(v) for lohi in region.box for v in lohi)

    def residuals(p):
        return total_field(source, p, time) * 1e6  # uT scaling conditions the solver

    res = least_squares(
        residuals,
        np.asarray(seed, dtype=float),
        method="trf",
        x_scale=scale,
        bounds=(
            [lo for lo, _ in region.box],
            [hi for _, hi in region.box],
        ),
        max_nfev=region.max_iterations * 10,
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
    )
    b = np.linalg.norm(total_field(source, res.x, time))
    if b > region.zero_tolerance:
        return None
    return res.x


def find_zeros(
    source: FieldSource, region: SearchRegion, time: float = 0.0
) -> list[TrapCandidate]:
    """Deterministic multi-start zero search; converged points are merged
    within 5 um and returned ordered by seed index."""
    if source.pattern is not None:
        region.validate_above_film(source.pattern.film.thickness)
    found: list[np.ndarray] = []
    for seed in region.seeds():
        p = _refine_zero(source, seed, time, region)
        if p is None:
            continue
        if any(np.linalg.norm(p - q) <= MERGE_RADIUS for q in found):
            continue
        found.append(p)
    traps = []
    for p in found:
        traps.append(_characterize(source, p, time))
    return traps


def _characterize(source: FieldSource, p: np.ndarray, time: float) -> TrapCandidate:
    grad = jacobian(source, p, time)
    eig, cls = classify(grad)
    return TrapCandidate(
        position=p,
        time=time,
        residual_B=float(np.linalg.norm(total_field(source, p, time))),
        gradient_tensor=grad,
        principal_gradients=eig,
        classification=cls,
    )


def trap_depth(
    source: FieldSource,
    trap: TrapCandidate,
    box: tuple[tuple[float, float], tuple[float, float], tuple[float, float]],
    time: float = 0.0,
    spacing: float = 5e-6,
) -> float:
    """|B| barrier separating the zero from the box boundary.

    Graded flood fill: cells are absorbed into the zero's sub-level region
    in order of increasing |B|; the depth is the level at which the region
    first touches a boundary cell, minus the trap's residual field.
    """
    axes = []
    for lo, hi in box:
        n = max(int(round((hi - lo) / spacing)) + 1, 3)
        axes.append(np.linspace(lo, hi, n))
    if not all(
        lo <= v <= hi for v, (lo, hi) in zip(trap.position, box)
    ):
        return 0.0
    xx, yy, zz = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=-1)
    bmag = np.linalg.norm(total_field(source, pts, time), axis=1).reshape(xx.shape)

    start = tuple(
        int(np.argmin(np.abs(ax - v))) for ax, v in zip(axes, trap.position)
    )
    shape = bmag.shape
    if any(i in (0, n - 1) for i, n in zip(start, shape)):
        return 0.0

    visited = np.zeros(shape, dtype=bool)
    heap = [(bmag[start], start)]
    visited[start] = True
    barrier = bmag[start]
    while heap:
        level, idx = heapq.heappop(heap)
        barrier = max(barrier, level)
        if any(i in (0, n - 1) for i, n in zip(idx, shape)):
            return max(barrier - trap.residual_B, 0.0)
        for axis in range(3):
            for d in (-1, 1):
                nxt = list(idx)
                nxt[axis] += d
                nxt = tuple(nxt)
                if 0 <= nxt[axis] < shape[axis] and not visited[nxt]:
                    visited[nxt] = True
                    heapq.heappush(heap, (bmag[nxt], nxt))
    return max(barrier - trap.residual_B, 0.0)


def _refine_ring_vertex(
    source, cx, cy, phi, rz0, r_max, time, region
) -> tuple[float, float] | None:
    """Solve for a zero of the in-plane-radial and vertical components at a
    fixed azimuth.

    Along a degenerate ring locus the full 3-D solver slides azimuthally to
    wherever the residual azimuthal ripple bottoms out; fixing the azimuth
    and solving in (r, z) pins one vertex per azimuth instead. The vertex
    only counts if the total |B| (including the azimuthal component) is
    within the region's zero tolerance.
    """
    c, s = np.cos(phi), np.sin(phi)
    radial = np.array([c, s, 0.0])

    def residuals(rz):
        p = np.array([cx + rz[0] * c, cy + rz[0] * s, rz[1]])
        b = total_field(source, p, time)
        return np.array([b @ radial, b[2]]) * 1e6

    res = least_squares(
        residuals,
        np.asarray(rz0, dtype=float),
        method="trf",
        bounds=([1e-9, region.box[2][0]], [r_max, region.box[2][1]]),
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=region.max_iterations * 5,
    )
    r, z = res.x
    p = np.array([cx + r * c, cy + r * s, z])
    if np.linalg.norm(total_field(source, p, time)) > region.zero_tolerance:
        return None
    return float(r), float(z)


@dataclass(frozen=True)
class RingLocus:
    """Ordered zero locus above an annular pattern."""

    vertices: np.ndarray  # (n, 3), azimuthally ordered
    transverse_gradients: np.ndarray  # (n, 2) two largest |principal gradients|
    closed: bool
    components: int  # 1 for a single closed curve


def ring_locus(
    source: FieldSource,
    region: SearchRegion,
    time: float = 0.0,
    seeds_azimuthal: int = 48,
) -> RingLocus:
    """Detect a one-dimensional closed locus of field zeros.

    Finds anchor zeros from the region's seed grid, then marches around
    the box center in azimuth steps, seeding each solve with the rotated
    anchor. The merged zero set is ordered by azimuth and closure is
    judged by comparing the largest azimuthal gap with the mean spacing.
    """
    if source.pattern is not None:
        region.validate_above_film(source.pattern.film.thickness)
    cx = np.mean(region.box[0])
    cy = np.mean(region.box[1])

    zeros: list[np.ndarray] = []

    def try_seed(seed) -> bool:
        p = _refine_zero(source, seed, time, region)
        if p is None:
            return False
        if any(np.linalg.norm(p - q) <= MERGE_RADIUS for q in zeros):
            return False
        zeros.append(p)
        return True

    for seed in region.seeds():
        try_seed(seed)
    if zeros:
        anchor = zeros[0]
        r0 = float(np.hypot(anchor[0] - cx, anchor[1] - cy))
        phi0 = float(np.arctan2(anchor[1] - cy, anchor[0] - cx))
        r_max = 0.5 * min(
            region.box[0][1] - region.box[0][0], region.box[1][1] - region.box[1][0]
        )
        rz = (max(r0, 1e-9), anchor[2])
        for k in range(1, seeds_azimuthal):
            phi = phi0 + 2.0 * np.pi * k / seeds_azimuthal
            sol = _refine_ring_vertex(source, cx, cy, phi, rz, r_max, time, region)
            if sol is None:
                continue
            rz = sol
            r, z = sol
            p = np.array([cx + r * np.cos(phi), cy + r * np.sin(phi), z])
            if region.contains(p) and not any(
                np.linalg.norm(p - q) <= MERGE_RADIUS for q in zeros
            ):
                zeros.append(p)

    if not zeros:
        return RingLocus(np.zeros((0, 3)), np.zeros((0, 2)), False, 0)

    pts = np.array(zeros)
    phi = np.arctan2(pts[:, 1] - cy, pts[:, 0] - cx)
    order = np.argsort(phi)
    pts = pts[order]
    phi = phi[order]

    n = len(pts)
    if n >= 8:
        gaps = np.diff(np.concatenate([phi, [phi[0] + 2 * np.pi]]))
        closed = bool(gaps.max() < 6.0 * (2 * np.pi / n))
        components = 1 if closed else int((gaps > 6.0 * (2 * np.pi / n)).sum())
    else:
        closed = False
        components = n

    grads = np.empty((n, 2))
    for i, p in enumerate(pts):
        eig, _ = classify(jacobian(source, p, time))
        mags = np.sort(np.abs(eig))
        grads[i] = mags[1:]  # the two non-degenerate directions
    return RingLocus(pts, grads, closed, components)


@dataclass(frozen=True)
class TransportPath:
    traps: list[TrapCandidate]
    times: np.ndarray
    lost_at: int | None  # sample index where the trap was lost, else None


def transport_trajectory(
    source: FieldSource, region: SearchRegion, samples: int
) -> TransportPath:
    """Quasi-static trap path over one bias-modulation period.

    Solves find_zeros at t_k = k*T/samples, seeding each solve from the
    previous solution. The path truncates with a loss index if no zero
    converges near the previous position.
    """
    if source.bias.modulation is None:
        raise ValueError("transport requires a modulated bias")
    period = source.bias.modulation.period
    times = np.arange(samples) * period / samples

    traps: list[TrapCandidate] = []
    lost_at = None
    prev = None
    for k, t in enumerate(times):
        if prev is None:
            candidates = find_zeros(source, region, time=float(t))
            if not candidates:
                lost_at = k
                break
            trap = candidates[0]
        else:
            p = _refine_zero(source, prev, float(t), region)
            if p is None:
                lost_at = k
                break
            trap = _characterize(source, p, float(t))
        traps.append(trap)
        prev = trap.position
    return TransportPath(traps=traps, times=times, lost_at=lost_at)
