"""Declarative scenario documents: JSON with explicit units in field names.

A scenario describes the film, the recorded edits, the applied bias and
auxiliary fields, an optional MOT setup, and a list of batch directives
(field-grid | traps | ring | transport | mot-run | capture). Parsing is
strict: unknown task names, missing fields and unit-less values are
validation errors that name the offending path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Annulus, Disk, Rectangle, Stroke
from .pattern import EditOp, FilmSpec, MagnetizationPattern, replay
from .fields.bias import AuxQuadrupole, BiasField, FieldSource, Modulation
from .mot.config import AtomSpecies, MOTConfig, rb85, six_beam_config

UM = 1e-6
MM = 1e-3
MT = 1e-3
UT = 1e-6
MW = 1e-3

TASKS = ("field-grid", "traps", "ring", "transport", "mot-run", "capture")


class ScenarioError(ValueError):
    """Scenario validation failure; message carries the field path."""


def _get(d: dict, key: str, path: str, required=True, default=None):
    if key not in d:
        if required:
            raise ScenarioError(f"{path}.{key}: missing required field")
        return default
    return d[key]


def _shape_from_dict(d: dict, path: str):
    kind = _get(d, "type", path)
    if kind == "disk":
        return Disk(
            center=tuple(np.asarray(_get(d, "center_um", path)) * UM),
            radius=_get(d, "radius_um", path) * UM,
        )
    if kind == "rectangle":
        return Rectangle(
            corner=tuple(np.asarray(_get(d, "corner_um", path)) * UM),
            size=tuple(np.asarray(_get(d, "size_um", path)) * UM),
        )
    if kind == "annulus":
        return Annulus(
            center=tuple(np.asarray(_get(d, "center_um", path)) * UM),
            r_inner=_get(d, "r_inner_um", path) * UM,
            r_outer=_get(d, "r_outer_um", path) * UM,
        )
    if kind == "stroke":
        return Stroke(
            polyline=tuple(
                tuple(np.asarray(p) * UM) for p in _get(d, "polyline_um", path)
            ),
            width=_get(d, "width_um", path) * UM,
        )
    raise ScenarioError(f"{path}.type: unknown shape type {kind!r}")


def _shape_to_dict(shape) -> dict:
    if isinstance(shape, Disk):
        return {
            "type": "disk",
            "center_um": [c / UM for c in shape.center],
            "radius_um": shape.radius / UM,
        }
    if isinstance(shape, Rectangle):
        return {
            "type": "rectangle",
            "corner_um": [c / UM for c in shape.corner],
            "size_um": [s / UM for s in shape.size],
        }
    if isinstance(shape, Annulus):
        return {
            "type": "annulus",
            "center_um": [c / UM for c in shape.center],
            "r_inner_um": shape.r_inner / UM,
            "r_outer_um": shape.r_outer / UM,
        }
    if isinstance(shape, Stroke):
        return {
            "type": "stroke",
            "polyline_um": [[c / UM for c in p] for p in shape.polyline],
            "width_um": shape.width / UM,
        }
    raise ScenarioError(f"cannot serialize shape {shape!r}")


def edit_from_dict(d: dict, path: str = "edit") -> EditOp:
    try:
        return EditOp(
            kind=_get(d, "kind", path, required=False, default="stamp"),
            shape=_shape_from_dict(_get(d, "shape", path), f"{path}.shape"),
            write_field_sign=int(_get(d, "write_field_sign", path)),
            beam_power=_get(d, "beam_power_mW", path) * MW,
            spot_diameter=_get(d, "spot_diameter_um", path, required=False, default=10.0)
            * UM,
        )
    except (ValueError, TypeError) as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(f"{path}: {e}") from e


def edit_to_dict(op: EditOp) -> dict:
    return {
        "kind": op.kind,
        "shape": _shape_to_dict(op.shape),
        "write_field_sign": op.write_field_sign,
        "beam_power_mW": op.beam_power / MW,
        "spot_diameter_um": op.spot_diameter / UM,
    }


@dataclass(frozen=True)
class MOTSpec:
    beam_power: float
    beam_diameter: float
    detuning_linewidths: float
    species: AtomSpecies
    film_absorption: float = 0.0

    def config(self, center=(0.0, 0.0, 0.0), axial_gradient_sign: int = 1) -> MOTConfig:
        return six_beam_config(
            species=self.species,
            power=self.beam_power,
            waist_diameter_1e2=self.beam_diameter,
            detuning=self.detuning_linewidths * self.species.linewidth,
            center=tuple(center),
            axial_gradient_sign=axial_gradient_sign,
            film_absorption=self.film_absorption,
        )


@dataclass(frozen=True)
class Scenario:
    film: FilmSpec
    initial_polarity: int
    edits: tuple[EditOp, ...]
    bias: BiasField
    aux_quadrupole: AuxQuadrupole | None
    mot: MOTSpec | None
    directives: tuple[dict, ...]

    def pattern(self) -> MagnetizationPattern:
        return replay(self.film, self.initial_polarity, self.edits)

    def source(self, backend: str = "edge") -> FieldSource:
        return FieldSource(
            pattern=self.pattern(),
            bias=self.bias,
            aux_quadrupole=self.aux_quadrupole,
            backend="sheet" if backend == "sheet" else "edge",
        )


def from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario: document root must be an object")
    f = _get(doc, "film", "scenario")
    try:
        film = FilmSpec(
            thickness=_get(f, "thickness_um", "film") * UM,
            remanence=_get(f, "remanence_mT", "film") * MT,
            coercive_field=_get(f, "coercivity_mT", "film", required=False, default=10.0)
            * MT,
            extent=tuple(np.asarray(_get(f, "extent_mm", "film")) * MM),
            cell_size=_get(f, "cell_size_um", "film") * UM,
        )
    except ValueError as e:
        if isinstance(e, ScenarioError):
            raise
        raise ScenarioError(f"film: {e}") from e

    polarity = int(doc.get("initial_polarity", 1))
    if polarity not in (-1, 1):
        raise ScenarioError("initial_polarity: must be -1 or +1")

    edits = tuple(
        edit_from_dict(e, f"edits[{i}]") for i, e in enumerate(doc.get("edits", []))
    )

    b = doc.get("bias", {})
    modulation = None
    if b.get("modulation") is not None:
        m = b["modulation"]
        period = _get(m, "period_s", "bias.modulation")
        if period <= 0:
            raise ScenarioError("bias.modulation.period_s: must be > 0")
        try:
            modulation = Modulation(
                amplitude=tuple(
                    np.asarray(_get(m, "amplitude_uT", "bias.modulation")) * UT
                ),
                angular_frequency=2.0 * math.pi / period,
                phase=tuple(
                    m.get("phase_rad", (0.0, 0.0, 0.0))
                ),
            )
        except ValueError as e:
            raise ScenarioError(f"bias.modulation: {e}") from e
    bias = BiasField(
        static=tuple(np.asarray(b.get("static_uT", (0, 0, 0))) * UT),
        modulation=modulation,
    )

    aux = None
    if doc.get("aux_quadrupole") is not None:
        a = doc["aux_quadrupole"]
        aux = AuxQuadrupole(
            center=tuple(np.asarray(_get(a, "center_um", "aux_quadrupole")) * UM),
            # 1 uT/cm = 1e-4 T/m
            axial_gradient=_get(a, "axial_gradient_uT_per_cm", "aux_quadrupole") * 1e-4,
        )

    mot = None
    if doc.get("mot") is not None:
        mo = doc["mot"]
        sp = rb85()
        if mo.get("species"):
            s = mo["species"]
            sp = AtomSpecies(
                mass=s.get("mass_kg", sp.mass),
                wavelength=s.get("wavelength_nm", sp.wavelength / 1e-9) * 1e-9,
                linewidth=2 * math.pi * s.get("linewidth_MHz", sp.linewidth / (2e6 * math.pi)) * 1e6,
                zeeman_rate=s.get("zeeman_rate_rad_per_sT", sp.zeeman_rate),
            )
        detuning = mo.get("detuning_linewidths", -1.0)
        if detuning >= 0:
            raise ScenarioError("mot.detuning_linewidths: must be negative (red)")
        mot = MOTSpec(
            beam_power=mo.get("beam_power_mW", 20.0) * MW,
            beam_diameter=mo.get("beam_diameter_mm", 10.0) * MM,
            detuning_linewidths=detuning,
            species=sp,
            film_absorption=mo.get("film_absorption", 0.0),
        )

    directives = []
    outputs = set()
    for i, d in enumerate(doc.get("directives", [])):
        path = f"directives[{i}]"
        task = _get(d, "task", path)
        if task not in TASKS:
            raise ScenarioError(f"{path}.task: unknown task {task!r}")
        if task == "transport" and modulation is None:
            raise ScenarioError(f"{path}: transport requires bias.modulation")
        if task in ("mot-run", "capture") and mot is None:
            raise ScenarioError(f"{path}: {task} requires a mot section")
        for key in ("output", "pgm", "figure", "summary", "sidecar"):
            out = d.get(key)
            if out is not None:
                if out in outputs:
                    raise ScenarioError(f"{path}.{key}: duplicate output path {out!r}")
                outputs.add(out)
        directives.append(dict(d))

    return Scenario(
        film=film,
        initial_polarity=polarity,
        edits=edits,
        bias=bias,
        aux_quadrupole=aux,
        mot=mot,
        directives=tuple(directives),
    )


def to_dict(sc: Scenario) -> dict:
    film = sc.film
    doc: dict = {
        "film": {
            "thickness_um": film.thickness / UM,
            "remanence_mT": film.remanence / MT,
            "coercivity_mT": film.coercive_field / MT,
            "extent_mm": [e / MM for e in film.extent],
            "cell_size_um": film.cell_size / UM,
        },
        "initial_polarity": sc.initial_polarity,
        "edits": [edit_to_dict(e) for e in sc.edits],
        "bias": {"static_uT": [b / UT for b in sc.bias.static]},
        "directives": [dict(d) for d in sc.directives],
    }
    if sc.bias.modulation is not None:
        m = sc.bias.modulation
        doc["bias"]["modulation"] = {
            "amplitude_uT": [a / UT for a in m.amplitude],
            "period_s": 2.0 * math.pi / m.angular_frequency,
            "phase_rad": list(m.phase),
        }
    if sc.aux_quadrupole is not None:
        doc["aux_quadrupole"] = {
            "center_um": [c / UM for c in sc.aux_quadrupole.center],
            "axial_gradient_uT_per_cm": sc.aux_quadrupole.axial_gradient / 1e-4,
        }
    if sc.mot is not None:
        doc["mot"] = {
            "beam_power_mW": sc.mot.beam_power / MW,
            "beam_diameter_mm": sc.mot.beam_diameter / MM,
            "detuning_linewidths": sc.mot.detuning_linewidths,
            "film_absorption": sc.mot.film_absorption,
            "species": {
                "mass_kg": sc.mot.species.mass,
                "wavelength_nm": sc.mot.species.wavelength / 1e-9,
                "linewidth_MHz": sc.mot.species.linewidth / (2e6 * math.pi),
                "zeeman_rate_rad_per_sT": sc.mot.species.zeeman_rate,
            },
        }
    return doc


def load(path: str | Path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    return from_dict(doc)


def dumps(sc: Scenario) -> str:
    return json.dumps(to_dict(sc), indent=2, sort_keys=True)


def content_hash(sc: Scenario) -> str:
    import hashlib

    canonical = json.dumps(to_dict(sc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
