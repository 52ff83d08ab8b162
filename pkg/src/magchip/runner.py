"""Directive execution shared by the CLI and the service layer."""

from __future__ import annotations

import json
import os
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .fields import CachedPatternField, total_field
from .fields.bias import FieldSource
from .fields.charge_sheet import field_charge_sheet
from .fields.edge_current import field_edge_current
from .fields.export import grid_csv, magnitude_pgm, trajectory_csv, traps_csv
from .fields.spectral import field_spectral_grid
from .mot.integrate import AtomEnsemble
from .mot.sim import capture_metric, simulate_cloud
from .scenario import Scenario, ScenarioError, content_hash
from .traps import SearchRegion, find_zeros, ring_locus, trap_depth, transport_trajectory

UM = 1e-6


class DirectiveError(RuntimeError):
    """Numeric/domain failure while executing a directive."""

    def __init__(self, directive: str, message: str):
        super().__init__(f"directive {directive!r}: {message}")
        self.directive = directive


def atomic_write(path: Path, data: bytes | str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _region_from_dict(d: dict, name: str) -> SearchRegion:
    try:
        return SearchRegion(
            box=(
                tuple(np.asarray(d["x_um"]) * UM),
                tuple(np.asarray(d["y_um"]) * UM),
                tuple(np.asarray(d["z_um"]) * UM),
            ),
            seed_grid=tuple(d.get("seeds", (4, 4, 6))),
            zero_tolerance=d.get("zero_tolerance_nT", 10.0) * 1e-9,
        )
    except (KeyError, ValueError) as e:
        raise ScenarioError(f"{name}.region: {e}") from e


def _maybe_figure(directive: dict, out_dir: Path):
    fig = directive.get("figure")
    return (out_dir / fig) if fig else None


class ScenarioRunner:
    def __init__(
        self,
        scenario: Scenario,
        out_dir: Path,
        backend: str = "edge",
        seed: int | None = None,
    ):
        self.scenario = scenario
        self.out_dir = Path(out_dir)
        self.backend = backend
        self.seed = seed
        self.pattern = scenario.pattern()
        self.source = FieldSource(
            pattern=self.pattern,
            bias=scenario.bias,
            aux_quadrupole=scenario.aux_quadrupole,
            backend="sheet" if backend == "sheet" else "edge",
        )
        self.records: list[dict] = []

    def run(self) -> dict:
        """Execute all directives in order and write the run manifest."""
        start = time.time()
        for directive in self.scenario.directives:
            t0 = time.time()
            task = directive["task"]
            handler = {
                "field-grid": self._run_field_grid,
                "traps": self._run_traps,
                "ring": self._run_ring,
                "transport": self._run_transport,
                "mot-run": self._run_mot,
                "capture": self._run_capture,
            }[task]
            try:
                outputs = handler(directive)
            except (ScenarioError, DirectiveError):
                raise
            except (ValueError, FloatingPointError, np.linalg.LinAlgError) as e:
                raise DirectiveError(task, str(e)) from e
            self.records.append(
                {"task": task, "outputs": outputs, "elapsed_s": time.time() - t0}
            )
        manifest = {
            "scenario_hash": content_hash(self.scenario),
            "package_version": __version__,
            "numpy_version": np.__version__,
            "scipy_version": scipy.__version__,
            "seed": self.seed,
            "backend": self.backend,
            "directives": self.records,
            "total_elapsed_s": time.time() - start,
        }
        atomic_write(
            self.out_dir / "run_manifest.json", json.dumps(manifest, indent=2) + "\n"
        )
        return manifest

    # -- directives ------------------------------------------------------

    def _grid_points(self, directive: dict):
        z = directive["z_um"] * UM
        gx = np.linspace(*(np.asarray(directive["x_um"]) * UM), directive.get("nx", 100))
        gy = np.linspace(*(np.asarray(directive["y_um"]) * UM), directive.get("ny", 100))
        return gx, gy, z

    def _run_field_grid(self, directive: dict) -> list[str]:
        gx, gy, z = self._grid_points(directive)
        max_cells = directive.get("resolution_cap", 1_000_000)
        if len(gx) * len(gy) > max_cells:
            raise DirectiveError("field-grid", "grid resolution exceeds the configured cap")
        backend = directive.get("backend", self.backend)
        xx, yy = np.meshgrid(gx, gy)
        pts = np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)])
        if backend == "spectral":
            B = field_spectral_grid(self.pattern, z, gx, gy).reshape(-1, 3)
            B = B + self.scenario.bias.evaluate(0.0)[None, :]
            if self.scenario.aux_quadrupole is not None:
                B = B + self.scenario.aux_quadrupole.evaluate(pts)
        else:
            src = replace(self.source, backend="sheet" if backend == "sheet" else "edge")
            B = total_field(src, pts)

        outputs = []
        out = directive.get("output")
        if out:
            atomic_write(self.out_dir / out, grid_csv(pts, B))
            outputs.append(out)
        if directive.get("pgm"):
            bmag = np.linalg.norm(B, axis=1).reshape(len(gy), len(gx))
            pgm, sidecar = magnitude_pgm(bmag)
            atomic_write(self.out_dir / directive["pgm"], pgm)
            outputs.append(directive["pgm"])
            sidecar_path = directive.get("sidecar", directive["pgm"] + ".txt")
            atomic_write(self.out_dir / sidecar_path, sidecar)
            outputs.append(sidecar_path)
        fig = _maybe_figure(directive, self.out_dir)
        if fig:
            from .report import heatmap_figure

            bmag = np.linalg.norm(B, axis=1).reshape(len(gy), len(gx))
            heatmap_figure(
                fig, gx, gy, bmag * 1e6, f"|B| at z = {z / UM:.0f} um", "|B| (uT)"
            )
            outputs.append(directive["figure"])
        return outputs

    def _run_traps(self, directive: dict) -> list[str]:
        region = _region_from_dict(directive["region"], "traps")
        traps = find_zeros(self.source, region)
        depths = None
        if directive.get("depth"):
            dd = directive["depth"]
            box = tuple(
                tuple(np.asarray(dd[k]) * UM) for k in ("x_um", "y_um", "z_um")
            )
            spacing = dd.get("spacing_um", 10.0) * UM
            depths = [trap_depth(self.source, t, box, spacing=spacing) for t in traps]
        outputs = []
        out = directive.get("output")
        if out:
            atomic_write(self.out_dir / out, traps_csv(traps, depths))
            outputs.append(out)
        scan = directive.get("axis_scan")
        if scan:
            zlo, zhi = np.asarray(scan["z_um"]) * UM
            n = scan.get("n", 200)
            x0 = scan.get("x_um", 0.0) * UM
            y0 = scan.get("y_um", 0.0) * UM
            zs = np.linspace(zlo, zhi, n)
            pts = np.column_stack([np.full(n, x0), np.full(n, y0), zs])
            B = total_field(self.source, pts)
            bmag = np.linalg.norm(B, axis=1)
            rows = ["x_m,y_m,z_m,Bx_T,By_T,Bz_T,Bmag_T"]
            for p, b, m in zip(pts, B, bmag):
                rows.append(
                    ",".join(f"{v:.9e}" for v in (*p, *b, m))
                )
            atomic_write(self.out_dir / scan["output"], "\n".join(rows) + "\n")
            outputs.append(scan["output"])
            if scan.get("figure"):
                from .report import axis_profile_figure

                axis_profile_figure(
                    self.out_dir / scan["figure"], zs, bmag, "|B| along the trap axis"
                )
                outputs.append(scan["figure"])
        fig = _maybe_figure(directive, self.out_dir)
        if fig:
            from .report import trap_map_figure

            trap_map_figure(fig, traps, self.scenario.film.extent, "trap positions")
            outputs.append(directive["figure"])
        return outputs

    def _run_ring(self, directive: dict) -> list[str]:
        region = _region_from_dict(directive["region"], "ring")
        locus = ring_locus(self.source, region)
        rows = ["x_m,y_m,z_m,gt1_Tpm,gt2_Tpm,closed,components"]
        for p, g in zip(locus.vertices, locus.transverse_gradients):
            rows.append(
                ",".join(f"{v:.9e}" for v in (*p, *g))
                + f",{int(locus.closed)},{locus.components}"
            )
        outputs = []
        out = directive.get("output")
        if out:
            atomic_write(self.out_dir / out, "\n".join(rows) + "\n")
            outputs.append(out)
        fig = _maybe_figure(directive, self.out_dir)
        if fig and len(locus.vertices):
            from .report import path_figure

            path_figure(fig, locus.vertices, "ring-trap zero locus")
            outputs.append(directive["figure"])
        return outputs

    def _run_transport(self, directive: dict) -> list[str]:
        region = _region_from_dict(directive["region"], "transport")
        samples = directive.get("samples", 16)
        path = transport_trajectory(self.source, region, samples)
        outputs = []
        out = directive.get("output")
        if out:
            atomic_write(self.out_dir / out, traps_csv(path.traps))
            outputs.append(out)
        fig = _maybe_figure(directive, self.out_dir)
        if fig and path.traps:
            from .report import path_figure

            path_figure(
                fig,
                np.array([t.position for t in path.traps]),
                "trap transport over one modulation period",
            )
            outputs.append(directive["figure"])
        return outputs

    def _mot_setup(self, directive: dict):
        region = _region_from_dict(directive["region"], directive["task"])
        traps = find_zeros(self.source, region)
        if not traps:
            raise DirectiveError(directive["task"], "no trap found in the region")
        trap = traps[0]
        spec = self.scenario.mot
        axial_sign = 1 if trap.principal_gradients[-1] >= 0 else -1
        config = spec.config(center=tuple(trap.position), axial_gradient_sign=axial_sign)
        cache_box = directive.get("cache_box_um")
        if cache_box:
            box = tuple(tuple(np.asarray(cache_box[k]) * UM) for k in ("x", "y", "z"))
        else:
            box = (
                (trap.position[0] - 1.5e-3, trap.position[0] + 1.5e-3),
                (trap.position[1] - 1.5e-3, trap.position[1] + 1.5e-3),
                (max(trap.position[2] - 1.5e-3, 2e-5), trap.position[2] + 1.5e-3),
            )
        cache = CachedPatternField.build(self.pattern, box)
        source = replace(self.source, pattern_cache=cache)
        return region, trap, spec, config, source

    def _run_mot(self, directive: dict) -> list[str]:
        region, trap, spec, config, source = self._mot_setup(directive)
        count = directive.get("count", 50)
        seed = directive.get("seed", self.seed)
        rng = np.random.default_rng(seed if seed is not None else 0)
        ens = AtomEnsemble.thermal(
            count,
            trap.position,
            position_sigma=directive.get("position_sigma_um", 30.0) * UM,
            speed_sigma=directive.get("speed_sigma_mps", 0.03),
            rng=rng,
        )
        dt = directive.get("dt_us", 20.0) * 1e-6
        duration = directive.get("duration_ms", 40.0) * 1e-3
        record_every = directive.get("record_every", 50)
        positions = [ens.positions.copy()]
        velocities = [ens.velocities.copy()]
        alive = [ens.alive.copy()]
        times = [0.0]
        summary, final = simulate_cloud(
            config,
            spec.species,
            source,
            ens,
            duration,
            dt,
            trap=trap,
            include_gravity=directive.get("gravity", False),
            seed=directive.get("stochastic_seed"),
            record_every=record_every,
        )
        positions.append(final.positions.copy())
        velocities.append(final.velocities.copy())
        alive.append(final.alive.copy())
        times.append(duration)

        outputs = []
        out = directive.get("output")
        if out:
            atomic_write(
                self.out_dir / out,
                trajectory_csv(
                    np.array(times),
                    np.array(positions),
                    np.array(velocities),
                    np.array(alive),
                ),
            )
            outputs.append(out)
        if directive.get("summary"):
            text = (
                "mot-run summary\n"
                f"captured_fraction {summary.captured_fraction}\n"
                f"centroid_m {summary.centroid.tolist()}\n"
                f"rms_radii_m {summary.rms_radii.tolist()}\n"
                f"alive_fraction {summary.alive_fraction}\n"
                f"seed {summary.seed}\n"
            )
            atomic_write(self.out_dir / directive["summary"], text)
            outputs.append(directive["summary"])
        fig = _maybe_figure(directive, self.out_dir)
        if fig:
            from .report import path_figure

            path_figure(
                fig,
                np.array([trap.position]),
                "final atom cloud vs trap",
                second=final.positions,
                labels=("trap", "atoms"),
            )
            outputs.append(directive["figure"])
        return outputs

    def _run_capture(self, directive: dict) -> list[str]:
        region, trap, spec, config, source = self._mot_setup(directive)
        metrics = capture_metric(
            config,
            spec.species,
            source,
            region,
            duration=directive.get("duration_ms", 30.0) * 1e-3,
            dt=directive.get("dt_us", 20.0) * 1e-6,
            volume_grid=directive.get("volume_grid", 5),
            volume_extent=directive.get("volume_extent_um", 1000.0) * UM,
            include_velocity=directive.get("capture_velocity", False),
        )
        outputs = []
        if directive.get("summary"):
            text = (
                "capture summary\n"
                f"capture_velocity_mps {metrics['capture_velocity']}\n"
                f"capture_volume_m3 {metrics['capture_volume']}\n"
                f"captured_count {metrics['captured_count']}\n"
            )
            atomic_write(self.out_dir / directive["summary"], text)
            outputs.append(directive["summary"])
        return outputs


def run_scenario(
    scenario: Scenario, out_dir, backend: str = "edge", seed: int | None = None
) -> dict:
    return ScenarioRunner(scenario, Path(out_dir), backend=backend, seed=seed).run()
