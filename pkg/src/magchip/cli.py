"""Command-line interface: scenario-driven batch runs and quick queries.

Exit codes: 0 success, 2 scenario validation failure, 3 numeric/domain
failure during execution.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from . import scenario as scn
from .fields.bias import FieldSource
from .runner import DirectiveError, ScenarioRunner, _region_from_dict
from .traps import SearchRegion, find_zeros

EXIT_VALIDATION = 2
EXIT_NUMERIC = 3


@click.group()
@click.option("--threads", type=int, default=None, help="worker thread cap")
@click.option("--seed", type=int, default=None, help="master random seed")
@click.option(
    "--backend",
    type=click.Choice(["edge", "sheet", "spectral"]),
    default="edge",
    help="default field backend",
)
@click.pass_context
def main(ctx, threads, seed, backend):
    """Transparent permanent-magnet atom chip design studio."""
    ctx.ensure_object(dict)
    ctx.obj.update(threads=threads, seed=seed, backend=backend)
    if threads is not None:
        # numpy/scipy honor these caps in their threaded kernels
        import os

        os.environ.setdefault("OMP_NUM_THREADS", str(threads))
        os.environ.setdefault("OPENBLAS_NUM_THREADS", str(threads))


def _load(path: str) -> scn.Scenario:
    try:
        return scn.load(path)
    except scn.ScenarioError as e:
        click.echo(f"validation error: {e}", err=True)
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=".", help="output directory")
@click.pass_context
def run(ctx, scenario_path, out):
    """Run every directive of a scenario file."""
    sc = _load(scenario_path)
    runner = ScenarioRunner(
        sc, Path(out), backend=ctx.obj["backend"], seed=ctx.obj["seed"]
    )
    try:
        manifest = runner.run()
    except scn.ScenarioError as e:
        click.echo(f"validation error: {e}", err=True)
        sys.exit(EXIT_VALIDATION)
    except DirectiveError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(
        f"ok: {len(manifest['directives'])} directive(s), "
        f"hash {manifest['scenario_hash'][:12]}"
    )


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
def validate(scenario_path):
    """Parse and validate a scenario file without running it."""
    sc = _load(scenario_path)
    click.echo(f"ok: {len(sc.directives)} directive(s), hash {scn.content_hash(sc)[:12]}")


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--z-um", type=float, required=True)
@click.option("--x-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--y-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--nx", type=int, default=100)
@click.option("--ny", type=int, default=100)
@click.option("--out", type=click.Path(), default="grid.csv")
@click.option("--pgm", type=click.Path(), default=None)
@click.option("--figure", type=click.Path(), default=None)
@click.pass_context
def grid(ctx, scenario_path, z_um, x_um, y_um, nx, ny, out, pgm, figure):
    """Evaluate a field grid from a scenario's pattern and bias."""
    sc = _load(scenario_path)
    directive = {
        "task": "field-grid",
        "z_um": z_um,
        "x_um": list(x_um),
        "y_um": list(y_um),
        "nx": nx,
        "ny": ny,
        "backend": ctx.obj["backend"],
        "output": Path(out).name,
        "pgm": Path(pgm).name if pgm else None,
        "figure": Path(figure).name if figure else None,
    }
    directive = {k: v for k, v in directive.items() if v is not None}
    runner = ScenarioRunner(sc, Path(out).parent, backend=ctx.obj["backend"])
    try:
        runner._run_field_grid(directive)
    except DirectiveError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"wrote {out}")


def _region_option(x_um, y_um, z_um, seeds):
    return {
        "x_um": list(x_um),
        "y_um": list(y_um),
        "z_um": list(z_um),
        "seeds": list(seeds),
    }


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--x-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--y-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--z-um", nargs=2, type=float, default=(50.0, 600.0))
@click.option("--seeds", nargs=3, type=int, default=(4, 4, 6))
@click.option("--out", type=click.Path(), default="traps.csv")
@click.pass_context
def traps(ctx, scenario_path, x_um, y_um, z_um, seeds, out):
    """Find field zeros (traps) inside a search box."""
    sc = _load(scenario_path)
    directive = {
        "task": "traps",
        "region": _region_option(x_um, y_um, z_um, seeds),
        "output": Path(out).name,
    }
    runner = ScenarioRunner(sc, Path(out).parent, backend=ctx.obj["backend"])
    try:
        runner._run_traps(directive)
    except DirectiveError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_NUMERIC)
    region = _region_from_dict(directive["region"], "traps")
    found = find_zeros(runner.source, region)
    for t in found:
        click.echo(
            f"trap at ({t.position[0] * 1e6:.1f}, {t.position[1] * 1e6:.1f}, "
            f"{t.position[2] * 1e6:.1f}) um, |B| = {t.residual_B:.2e} T, "
            f"{t.classification}"
        )
    click.echo(f"wrote {out}")


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--samples", type=int, default=16)
@click.option("--x-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--y-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--z-um", nargs=2, type=float, default=(50.0, 600.0))
@click.option("--seeds", nargs=3, type=int, default=(4, 4, 6))
@click.option("--out", type=click.Path(), default="transport.csv")
@click.pass_context
def transport(ctx, scenario_path, samples, x_um, y_um, z_um, seeds, out):
    """Trace the quasi-static trap path over one modulation period."""
    sc = _load(scenario_path)
    if sc.bias.modulation is None:
        click.echo("validation error: transport requires bias.modulation", err=True)
        sys.exit(EXIT_VALIDATION)
    directive = {
        "task": "transport",
        "samples": samples,
        "region": _region_option(x_um, y_um, z_um, seeds),
        "output": Path(out).name,
    }
    runner = ScenarioRunner(sc, Path(out).parent, backend=ctx.obj["backend"])
    try:
        runner._run_transport(directive)
    except DirectiveError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"wrote {out}")


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--count", type=int, default=50)
@click.option("--duration-ms", type=float, default=40.0)
@click.option("--dt-us", type=float, default=20.0)
@click.option("--x-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--y-um", nargs=2, type=float, default=(-500.0, 500.0))
@click.option("--z-um", nargs=2, type=float, default=(50.0, 600.0))
@click.option("--out", type=click.Path(), default="atoms.csv")
@click.option("--summary", type=click.Path(), default="mot_summary.txt")
@click.pass_context
def mot(ctx, scenario_path, count, duration_ms, dt_us, x_um, y_um, z_um, out, summary):
    """Simulate an atom cloud in the six-beam MOT above the pattern."""
    sc = _load(scenario_path)
    if sc.mot is None:
        click.echo("validation error: scenario has no mot section", err=True)
        sys.exit(EXIT_VALIDATION)
    directive = {
        "task": "mot-run",
        "count": count,
        "duration_ms": duration_ms,
        "dt_us": dt_us,
        "region": _region_option(x_um, y_um, z_um, (3, 3, 4)),
        "output": Path(out).name,
        "summary": Path(summary).name,
        "seed": ctx.obj["seed"],
    }
    runner = ScenarioRunner(
        sc, Path(out).parent, backend=ctx.obj["backend"], seed=ctx.obj["seed"]
    )
    try:
        runner._run_mot(directive)
    except DirectiveError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"wrote {out} and {summary}")


if __name__ == "__main__":
    main()
