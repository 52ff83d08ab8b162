"""End-to-end acceptance suite.

Each test covers one release criterion at its stated tolerance and prints a
single PASS/FAIL line (visible with ``pytest -s`` or on failure). Criteria:

1. single-disk trap geometry (position, gradients, runtime)
2. field-backend cross-validation on a pattern suite
3. gradient-tensor Maxwell properties per backend
4. ring-trap locus and azimuthal transport under modulated bias
5. light-force property suite (null, restoring, capture, aux volume, Doppler)
6. two-disk trap array
7. raster write semantics (involution, optical zero, power threshold)
8. byte-deterministic scenario runs
"""

import json
import time
from dataclasses import replace

import numpy as np
import pytest
from click.testing import CliRunner

from magchip.cli import main
from magchip.constants import HBAR
from magchip.fields.bias import (
    AuxQuadrupole,
    BiasField,
    FieldSource,
    Modulation,
)
from magchip.fields.charge_sheet import field_charge_sheet
from magchip.fields.edge_current import field_edge_current
from magchip.fields.spectral import field_spectral_grid, spectral_plane
from magchip.geometry import Annulus, Disk, Rectangle, Stroke
from magchip.mot.config import Beam, MOTConfig, rb85, six_beam_config
from magchip.mot.forces import total_force
from magchip.mot.integrate import AtomEnsemble, step_ensemble
from magchip.mot.sim import capture_metric, simulate_cloud
from magchip.pattern import EditOp, apply_edit, create_uniform, default_film
from magchip.traps import SearchRegion, find_zeros, jacobian, ring_locus, transport_trajectory
from tests.conftest import reversing_stamp

SPECIES = rb85()


def _criterion(name: str, failures: list[str]):
    ok = not failures
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}")
    assert ok, f"{name}: " + "; ".join(failures)


def _check(failures: list[str], ok: bool, message: str):
    if not ok:
        failures.append(message)


@pytest.fixture(scope="module")
def two_disk_pattern(film, disk_radius):
    """Two calibrated disks 3 mm apart on the shared film."""
    p = create_uniform(film, +1)
    for cx in (-1.5e-3, 1.5e-3):
        p = apply_edit(p, reversing_stamp(Disk(center=(cx, 0.0), radius=disk_radius)))
    return p


def test_single_disk_trap_geometry(film, disk_radius):
    failures: list[str] = []
    t0 = time.perf_counter()
    pattern = apply_edit(
        create_uniform(film, +1),
        reversing_stamp(Disk(center=(0.0, 0.0), radius=disk_radius)),
    )
    source = FieldSource(pattern=pattern, bias=BiasField(static=(0.0, 0.0, 60e-6)))
    region = SearchRegion(
        box=((-300e-6, 300e-6), (-300e-6, 300e-6), (60e-6, 500e-6)),
        seed_grid=(3, 3, 4),
    )
    traps = find_zeros(source, region)
    elapsed = time.perf_counter() - t0

    _check(failures, len(traps) == 1, f"expected exactly one trap, found {len(traps)}")
    if traps:
        trap = traps[0]
        x, y, z = trap.position
        _check(failures, abs(x) < 5e-6 and abs(y) < 5e-6,
               f"trap off-axis by ({x:.2e}, {y:.2e}) m")
        _check(failures, abs(z - 200e-6) <= 0.15 * 200e-6,
               f"trap height {z * 1e6:.1f} um not within 15% of 200 um")
        g = np.sort(trap.principal_gradients)  # ascending: two transverse, one axial
        axial = g[2]
        _check(failures, abs(axial - 0.35) <= 0.15 * 0.35,
               f"axial gradient {axial:.3f} T/m not within 15% of 0.35 T/m")
        for gt in g[:2]:
            _check(failures, abs(gt - (-axial / 2)) <= 0.02 * abs(axial / 2),
                   f"transverse gradient {gt:.4f} not -axial/2 within 2%")
    _check(failures, elapsed < 10.0, f"runtime {elapsed:.1f} s >= 10 s")
    _criterion("single-disk trap geometry", failures)


def test_field_backend_cross_validation(film, disk_radius, disk_pattern,
                                        annulus_pattern, two_disk_pattern, rng):
    failures: list[str] = []
    t0 = time.perf_counter()
    square = apply_edit(
        create_uniform(film, +1),
        reversing_stamp(Rectangle(corner=(-250e-6, -250e-6), size=(500e-6, 500e-6))),
    )
    suite = {
        "disk": disk_pattern,
        "square": square,
        "annulus": annulus_pattern,
        "two-disk": two_disk_pattern,
    }
    for name, pattern in suite.items():
        pts = np.stack(
            [
                rng.uniform(-1.8e-3, 1.8e-3, 25),
                rng.uniform(-1.2e-3, 1.2e-3, 25),
                rng.uniform(film.thickness, 5e-3, 25),
            ],
            axis=1,
        )
        be = field_edge_current(pattern, pts)
        bs = field_charge_sheet(pattern, pts)
        scale = np.linalg.norm(be, axis=1).max()
        dev = np.abs(be - bs).max() / scale
        _check(failures, dev < 0.01,
               f"{name}: edge vs sheet deviation {dev:.2%} >= 1%")

        z = 200e-6
        gx = np.linspace(-1.7e-3, 1.7e-3, 15)
        gy = np.linspace(-1.0e-3, 1.0e-3, 15)
        bsp = field_spectral_grid(pattern, z, gx, gy).reshape(-1, 3)
        xx, yy = np.meshgrid(gx, gy)
        plane_pts = np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)])
        bed = field_edge_current(pattern, plane_pts)
        sdev = np.abs(bsp - bed).max() / np.linalg.norm(bed, axis=1).max()
        _check(failures, sdev < 0.03,
               f"{name}: spectral deviation {sdev:.2%} >= 3%")
    elapsed = time.perf_counter() - t0
    _check(failures, elapsed < 60.0, f"runtime {elapsed:.1f} s >= 60 s")
    _criterion("field-backend cross-validation", failures)


def _maxwell_deviations(J: np.ndarray) -> tuple[float, float]:
    trace_rel = abs(np.trace(J)) / np.abs(J).max()
    asym_rel = np.abs(J - J.T).max() / np.linalg.norm(J)
    return trace_rel, asym_rel


def test_gradient_tensor_maxwell_properties(disk_source, small_film, rng):
    failures: list[str] = []
    for backend in ("edge", "sheet"):
        source = replace(disk_source, backend=backend)
        worst_trace = worst_asym = 0.0
        for _ in range(50):
            p = np.array(
                [
                    rng.uniform(-1e-3, 1e-3),
                    rng.uniform(-1e-3, 1e-3),
                    rng.uniform(50e-6, 2e-3),
                ]
            )
            tr, asym = _maxwell_deviations(jacobian(source, p))
            worst_trace = max(worst_trace, tr)
            worst_asym = max(worst_asym, asym)
        _check(failures, worst_trace <= 1e-4,
               f"{backend}: worst |trace| {worst_trace:.2e} > 1e-4 of max entry")
        _check(failures, worst_asym <= 1e-3,
               f"{backend}: worst asymmetry {worst_asym:.2e} > 1e-3 of |J|")

    # spectral backend: derivatives of the synthesized planes at grid nodes
    pattern = apply_edit(
        create_uniform(small_film, +1),
        reversing_stamp(Disk(center=(0.0, 0.0), radius=40e-6)),
    )
    d = small_film.cell_size
    h = 1e-6
    worst_trace = worst_asym = 0.0
    for _ in range(50):
        ix = int(rng.integers(20, 80))
        iy = int(rng.integers(20, 80))
        z = rng.uniform(40e-6, 120e-6)
        B0 = spectral_plane(pattern, z, pad_factor=4)[2]

        def d4(f2, f1, fm1, fm2):
            return (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * d)

        def dz_central(hh: float) -> np.ndarray:
            Bp = spectral_plane(pattern, z + hh, pad_factor=4)[2][iy, ix]
            Bm = spectral_plane(pattern, z - hh, pad_factor=4)[2][iy, ix]
            return (Bp - Bm) / (2.0 * hh)

        dBdx = d4(B0[iy, ix + 2], B0[iy, ix + 1], B0[iy, ix - 1], B0[iy, ix - 2])
        dBdy = d4(B0[iy + 2, ix], B0[iy + 1, ix], B0[iy - 1, ix], B0[iy - 2, ix])
        dBdz = (4.0 * dz_central(h / 2.0) - dz_central(h)) / 3.0
        J = np.stack([dBdx, dBdy, dBdz], axis=-1)
        tr, asym = _maxwell_deviations(J)
        worst_trace = max(worst_trace, tr)
        worst_asym = max(worst_asym, asym)
    _check(failures, worst_trace <= 1e-4,
           f"spectral: worst |trace| {worst_trace:.2e} > 1e-4 of max entry")
    _check(failures, worst_asym <= 1e-3,
           f"spectral: worst asymmetry {worst_asym:.2e} > 1e-3 of |J|")
    _criterion("gradient-tensor Maxwell properties", failures)


def _azimuths_deg(positions: np.ndarray) -> np.ndarray:
    return np.degrees(np.arctan2(positions[:, 1], positions[:, 0]))


def _net_circulation_deg(phis: np.ndarray) -> float:
    """Sum of wrapped azimuth increments around the closed sample loop."""
    closed = np.append(phis, phis[0])
    inc = np.diff(closed)
    inc = (inc + 180.0) % 360.0 - 180.0
    return float(inc.sum())


def test_ring_locus_and_azimuthal_transport(annulus_pattern, ring_source, ring_region):
    failures: list[str] = []
    locus = ring_locus(ring_source, ring_region)
    _check(failures, locus.closed, "ring locus not closed")
    _check(failures, locus.components == 1,
           f"{locus.components} components, expected one closed curve")

    modulated = FieldSource(
        pattern=annulus_pattern,
        bias=BiasField(
            static=(0.0, 0.0, 45e-6),
            modulation=Modulation(
                amplitude=(27e-6, 27e-6, 0.0),
                angular_frequency=2.0 * np.pi * 10.0,
                phase=(0.0, np.pi / 2.0, 0.0),
            ),
        ),
    )
    path = transport_trajectory(modulated, ring_region, samples=16)
    _check(failures, path.lost_at is None and len(path.traps) == 16,
           f"transport lost the trap at sample {path.lost_at}")
    if len(path.traps) == 16:
        pos = np.array([t.position for t in path.traps])
        phis = _azimuths_deg(pos)
        quarters = phis[[0, 4, 8, 12]]
        steps = np.abs((np.diff(np.append(quarters, quarters[0]))
                        + 180.0) % 360.0 - 180.0)
        for s in steps:
            _check(failures, abs(s - 90.0) <= 5.0,
                   f"quarter-period azimuth step {s:.1f} deg outside 90 +/- 5")
        net = _net_circulation_deg(phis)
        _check(failures, abs(abs(net) - 360.0) <= 10.0,
               f"net circulation {net:.1f} deg, expected one full turn")

    in_phase = replace(
        modulated,
        bias=replace(modulated.bias,
                     modulation=replace(modulated.bias.modulation,
                                        phase=(0.0, 0.0, 0.0))),
    )
    control = transport_trajectory(in_phase, ring_region, samples=8)
    if control.traps:
        phis = _azimuths_deg(np.array([t.position for t in control.traps]))
        net = _net_circulation_deg(phis)
        _check(failures, abs(net) <= 15.0,
               f"in-phase control circulates {net:.1f} deg, expected none")
    else:
        failures.append("in-phase control found no trap")
    _criterion("ring locus and azimuthal transport", failures)


def test_light_force_property_suite(disk_source, disk_trap, cached_disk_source,
                                    trap_region):
    failures: list[str] = []
    t0 = time.perf_counter()
    axial_sign = 1 if disk_trap.principal_gradients[-1] >= 0 else -1
    config = six_beam_config(
        SPECIES, power=5e-3, center=tuple(disk_trap.position),
        axial_gradient_sign=axial_sign,
    )

    # (a) force null at the field zero with v = 0
    f0 = total_force(config, SPECIES, disk_source, disk_trap.position, np.zeros(3))
    _check(failures, np.linalg.norm(f0) < 1e-23,
           f"net force at the zero {np.linalg.norm(f0):.2e} N >= 1e-23 N")

    # (b) restoring sign for 50 um displacements on all six axis directions
    for axis in range(3):
        for sgn in (+1, -1):
            p = disk_trap.position.copy()
            p[axis] += sgn * 50e-6
            f = total_force(config, SPECIES, disk_source, p, np.zeros(3))
            _check(failures, f[axis] * sgn < 0,
                   f"non-restoring force on axis {axis}, sign {sgn:+d}")

    # (c) deterministic capture of a thermal cloud seeded at the trap
    rng = np.random.default_rng(7)
    n = 40
    ens = AtomEnsemble.create(
        np.tile(disk_trap.position, (n, 1)),
        rng.normal(0.0, 0.05, size=(n, 3)),
    )
    summary, _ = simulate_cloud(
        config, SPECIES, cached_disk_source, ens, 50e-3, 10e-6, trap=disk_trap
    )
    _check(failures, summary.captured_fraction > 0.9,
           f"captured fraction {summary.captured_fraction:.2f} <= 0.9")
    offset = np.linalg.norm(summary.centroid - disk_trap.position)
    _check(failures, offset < 10e-6,
           f"cloud centroid {offset * 1e6:.1f} um from the trap, >= 10 um")

    # (d) auxiliary quadrupole strictly increases the capture volume
    aux_source = replace(
        cached_disk_source,
        aux_quadrupole=AuxQuadrupole(
            center=tuple(disk_trap.position), axial_gradient=0.03
        ),
    )
    volumes = {}
    for label, source in (("bare", cached_disk_source), ("aux", aux_source)):
        volumes[label] = capture_metric(
            config, SPECIES, source, trap_region,
            duration=100e-3, dt=20e-6, volume_grid=7, volume_extent=1e-3,
            include_velocity=False,
        )["capture_volume"]
    _check(failures, volumes["aux"] > volumes["bare"],
           f"capture volume {volumes['aux']:.2e} with aux not > "
           f"{volumes['bare']:.2e} without")

    # (e) 1-D stochastic equilibrium within a factor 2 of the Doppler scale
    waist = 10e-3
    peak = 0.25 * 16.7 * np.pi * waist**2 / 4  # power for s = 0.25 per beam
    beams = (
        Beam((1, 0, 0), -1, 0.0, waist),
        Beam((-1, 0, 0), -1, 0.0, waist),
        Beam((0, 1, 0), -1, 0.0, waist),
        Beam((0, -1, 0), -1, 0.0, waist),
        Beam((0, 0, 1), 1, peak, waist),
        Beam((0, 0, -1), 1, peak, waist),
    )
    molasses = MOTConfig(
        beams=beams,
        detuning=-SPECIES.linewidth / 2,
        wavelength=SPECIES.wavelength,
        linewidth=SPECIES.linewidth,
        saturation_intensity=16.7,
        zeeman_rate=SPECIES.zeeman_rate,
    )
    free = FieldSource()
    rng = np.random.default_rng(11)
    ens = AtomEnsemble.create(np.zeros((40, 3)), np.zeros((40, 3)))
    dt, n_steps = 1e-6, 8000
    vz = []
    for k in range(n_steps):
        ens = step_ensemble(ens, molasses, SPECIES, free, dt, time=k * dt, rng=rng)
        if k > n_steps // 2:
            vz.append(ens.velocities[:, 2].copy())
    kbt = SPECIES.mass * np.concatenate(vz).var()
    doppler = HBAR * SPECIES.linewidth / 2
    _check(failures, doppler / 2 < kbt < doppler * 2,
           f"equilibrium k_B T = {kbt / doppler:.2f} x Doppler scale, "
           "outside the factor-2 window")

    elapsed = time.perf_counter() - t0
    _check(failures, elapsed < 300.0, f"runtime {elapsed:.0f} s >= 300 s")
    _criterion("light-force property suite", failures)


def test_two_disk_trap_array(two_disk_pattern):
    failures: list[str] = []
    source = FieldSource(
        pattern=two_disk_pattern, bias=BiasField(static=(0.0, 0.0, 60e-6))
    )
    region = SearchRegion(
        box=((-1.8e-3, 1.8e-3), (-300e-6, 300e-6), (60e-6, 500e-6)),
        seed_grid=(9, 3, 4),
    )
    traps = find_zeros(source, region)
    _check(failures, len(traps) == 2, f"expected two traps, found {len(traps)}")
    centers = np.array([[-1.5e-3, 0.0], [1.5e-3, 0.0]])
    for center in centers:
        lateral = [
            np.linalg.norm(t.position[:2] - center) for t in traps
        ] or [np.inf]
        best = min(lateral)
        _check(failures, best < 50e-6,
               f"no trap within 50 um laterally of disk at x = {center[0]:.1e} "
               f"(closest {best * 1e6:.1f} um)")
    _criterion("two-disk trap array", failures)


def test_raster_write_semantics(small_film):
    failures: list[str] = []
    base = create_uniform(small_film, +1)
    disk = Disk(center=(0.0, 0.0), radius=40e-6)

    written = apply_edit(base, reversing_stamp(disk))
    restored = apply_edit(
        written,
        EditOp(kind="stamp", shape=disk, write_field_sign=+1,
               beam_power=20e-3, spot_diameter=10e-6),
    )
    _check(failures, restored.cells.tobytes() == base.cells.tobytes(),
           "write/erase round trip is not byte-exact")

    zeroed = apply_edit(
        base,
        EditOp(kind="stamp", shape=disk, write_field_sign=0,
               beam_power=20e-3, spot_diameter=10e-6),
    )
    inside = zeroed.cells[zeroed.cells != base.cells]
    _check(failures, inside.size > 0 and (inside == 0).all(),
           "optical zero-field write did not demagnetize the stamped cells")

    at_threshold = apply_edit(
        base,
        EditOp(kind="stamp", shape=disk, write_field_sign=-1,
               beam_power=10e-3, spot_diameter=10e-6),
    )
    _check(failures, (at_threshold.cells == -1).any(),
           "10 mW / 10 um spot failed to write")
    under = apply_edit(
        base,
        EditOp(kind="stamp", shape=disk, write_field_sign=-1,
               beam_power=9e-3, spot_diameter=10e-6),
    )
    _check(failures, under.cells.tobytes() == base.cells.tobytes(),
           "sub-threshold write modified the film")
    _criterion("raster write semantics", failures)


def test_scenario_run_determinism(disk_radius, tmp_path):
    failures: list[str] = []
    doc = {
        "film": {
            "thickness_um": 1.8,
            "remanence_mT": 20.0,
            "extent_mm": [4.0, 4.0],
            "cell_size_um": 2.0,
        },
        "initial_polarity": 1,
        "edits": [
            {
                "kind": "stamp",
                "shape": {
                    "type": "disk",
                    "center_um": [0, 0],
                    "radius_um": disk_radius * 1e6,
                },
                "write_field_sign": -1,
                "beam_power_mW": 20.0,
                "spot_diameter_um": 10.0,
            }
        ],
        "bias": {"static_uT": [0.0, 0.0, 60.0]},
        "directives": [
            {
                "task": "field-grid", "z_um": 200.0, "x_um": [-400, 400],
                "y_um": [-400, 400], "nx": 60, "ny": 60,
                "output": "grid.csv", "pgm": "grid.pgm",
            },
            {
                "task": "traps", "output": "traps.csv",
                "region": {"x_um": [-300, 300], "y_um": [-300, 300],
                           "z_um": [60, 500], "seeds": [3, 3, 4]},
            },
        ],
    }
    scenario_path = tmp_path / "scenario.json"
    scenario_path.write_text(json.dumps(doc))
    runs = []
    for label in ("a", "b"):
        out = tmp_path / label
        result = CliRunner().invoke(
            main, ["run", str(scenario_path), "--out", str(out)]
        )
        _check(failures, result.exit_code == 0,
               f"run {label} exited {result.exit_code}: {result.output}")
        runs.append(out)
    if not failures:
        for name in ("grid.csv", "grid.pgm", "grid.pgm.txt", "traps.csv"):
            same = (runs[0] / name).read_bytes() == (runs[1] / name).read_bytes()
            _check(failures, same, f"{name} differs between identical runs")
    _criterion("byte-deterministic scenario runs", failures)
