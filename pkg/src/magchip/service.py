"""HTTP + websocket service backing the interactive UI.

Sessions hold a live scenario document with optimistic concurrency via
revision numbers: every accepted mutation bumps the revision, and
mutations carrying a stale base revision are rejected with 409. Field
grids, trap queries and transport paths are computed against an immutable
snapshot of the revision they were requested at, so the results match a
CLI run of the same scenario.

Run with:  uvicorn magchip.service:create_app --factory --port 8000
"""

from __future__ import annotations

import asyncio
import itertools
import json
import struct
import threading
import time
from dataclasses import dataclass, field, replace

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import scenario as scn
from .fields.bias import BiasField, FieldSource, Modulation, total_field
from .fields.spectral import field_spectral_grid
from .mot.integrate import AtomEnsemble, step_ensemble
from .pattern import faraday_image, to_pgm
from .runner import _region_from_dict
from .traps import find_zeros, transport_trajectory

UM = 1e-6
UT = 1e-6


@dataclass
class Session:
    id: str
    scenario: scn.Scenario
    revision: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    mutation_log: list = field(default_factory=list)
    sim_task: object = None
    sim_controls: object = None


def _session_view(session: Session) -> dict:
    return {
        "id": session.id,
        "revision": session.revision,
        "scenario": scn.to_dict(session.scenario),
    }


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="magchip service")
    sessions: dict[str, Session] = {}
    counter = itertools.count(1)

    def get_session(session_id: str) -> Session:
        s = sessions.get(session_id)
        if s is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return s

    def parse_scenario(body: dict) -> scn.Scenario:
        try:
            return scn.from_dict(body)
        except scn.ScenarioError as e:
            raise HTTPException(status_code=422, detail=str(e))

    @app.post("/api/session")
    async def create_session(body: dict):
        sc = parse_scenario(body)
        sid = f"s{next(counter)}"
        sessions[sid] = Session(id=sid, scenario=sc)
        return _session_view(sessions[sid])

    @app.get("/api/session/{session_id}")
    async def get_scenario(session_id: str):
        return _session_view(get_session(session_id))

    @app.post("/api/session/{session_id}/edits")
    async def append_edits(session_id: str, body: dict):
        session = get_session(session_id)
        base = body.get("base_revision")
        try:
            ops = [
                scn.edit_from_dict(e, f"edits[{i}]")
                for i, e in enumerate(body.get("edits", []))
            ]
        except scn.ScenarioError as e:
            raise HTTPException(status_code=422, detail=str(e))
        with session.lock:
            if base is not None and base != session.revision:
                raise HTTPException(status_code=409, detail="stale base revision")
            sc = session.scenario
            session.scenario = replace(sc, edits=sc.edits + tuple(ops))
            session.revision += 1
            session.mutation_log.append({"kind": "edits", "edits": body.get("edits", [])})
            return {"revision": session.revision}

    @app.put("/api/session/{session_id}/bias")
    async def set_bias(session_id: str, body: dict):
        session = get_session(session_id)
        base = body.get("base_revision")
        try:
            modulation = None
            if body.get("modulation") is not None:
                m = body["modulation"]
                modulation = Modulation(
                    amplitude=tuple(np.asarray(m["amplitude_uT"]) * UT),
                    angular_frequency=2 * np.pi / m["period_s"],
                    phase=tuple(m.get("phase_rad", (0.0, 0.0, 0.0))),
                )
            bias = BiasField(
                static=tuple(np.asarray(body.get("static_uT", (0, 0, 0))) * UT),
                modulation=modulation,
            )
        except (KeyError, ValueError, TypeError) as e:
            raise HTTPException(status_code=422, detail=f"bias: {e}")
        with session.lock:
            if base is not None and base != session.revision:
                raise HTTPException(status_code=409, detail="stale base revision")
            session.scenario = replace(session.scenario, bias=bias)
            session.revision += 1
            session.mutation_log.append({"kind": "bias", "bias": body})
            return {"revision": session.revision}

    @app.post("/api/session/{session_id}/grid")
    async def compute_grid(session_id: str, body: dict):
        session = get_session(session_id)
        with session.lock:
            sc = session.scenario
            revision = session.revision
        try:
            z = body["z_um"] * UM
            nx = int(body.get("nx", 100))
            ny = int(body.get("ny", 100))
            hx, hy = sc.film.extent[0] / 2, sc.film.extent[1] / 2
            gx = np.linspace(*(np.asarray(body.get("x_um", (-hx / UM, hx / UM))) * UM), nx)
            gy = np.linspace(*(np.asarray(body.get("y_um", (-hy / UM, hy / UM))) * UM), ny)
        except (KeyError, TypeError, ValueError) as e:
            raise HTTPException(status_code=422, detail=f"grid: {e}")
        pattern = sc.pattern()
        xx, yy = np.meshgrid(gx, gy)
        pts = np.column_stack([xx.ravel(), yy.ravel(), np.full(xx.size, z)])
        try:
            B = field_spectral_grid(pattern, z, gx, gy).reshape(-1, 3)
        except ValueError as e:
            raise HTTPException(status_code=422, detail=str(e))
        B = B + sc.bias.evaluate(0.0)[None, :]
        if sc.aux_quadrupole is not None:
            B = B + sc.aux_quadrupole.evaluate(pts)
        bmag = np.linalg.norm(B, axis=1).reshape(ny, nx)
        if body.get("format") == "binary":
            header = json.dumps(
                {
                    "width": nx,
                    "height": ny,
                    "z_um": z / UM,
                    "revision": revision,
                    "dtype": "float64-le",
                    "units": "T",
                    "order": "row-major",
                }
            )
            payload = header.encode() + b"\n" + np.ascontiguousarray(
                bmag, dtype="<f8"
            ).tobytes()
            return Response(content=payload, media_type="application/octet-stream")
        return {
            "revision": revision,
            "width": nx,
            "height": ny,
            "bmag_T": bmag.tolist(),
        }

    @app.post("/api/session/{session_id}/traps")
    async def compute_traps(session_id: str, body: dict):
        session = get_session(session_id)
        with session.lock:
            sc = session.scenario
            revision = session.revision
        try:
            region = _region_from_dict(body, "traps")
        except scn.ScenarioError as e:
            raise HTTPException(status_code=422, detail=str(e))
        traps = find_zeros(sc.source(), region)
        return {
            "revision": revision,
            "traps": [
                {
                    "position_um": (t.position / UM).tolist(),
                    "residual_T": t.residual_B,
                    "principal_gradients_Tpm": t.principal_gradients.tolist(),
                    "classification": t.classification,
                }
                for t in traps
            ],
        }

    @app.post("/api/session/{session_id}/transport")
    async def compute_transport(session_id: str, body: dict):
        session = get_session(session_id)
        with session.lock:
            sc = session.scenario
            revision = session.revision
        if sc.bias.modulation is None:
            raise HTTPException(status_code=422, detail="transport requires modulation")
        try:
            region = _region_from_dict(body, "transport")
            samples = int(body.get("samples", 16))
        except (scn.ScenarioError, ValueError, TypeError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        path = transport_trajectory(sc.source(), region, samples)
        return {
            "revision": revision,
            "times_s": path.times[: len(path.traps)].tolist(),
            "positions_um": [(t.position / UM).tolist() for t in path.traps],
            "lost_at": path.lost_at,
        }

    @app.get("/api/session/{session_id}/faraday")
    async def faraday(session_id: str):
        session = get_session(session_id)
        with session.lock:
            sc = session.scenario
            revision = session.revision
        pgm = to_pgm(sc.pattern())
        return Response(
            content=pgm,
            media_type="image/x-portable-graymap",
            headers={"X-Revision": str(revision)},
        )

    @app.websocket("/api/session/{session_id}/stream")
    async def mot_stream(ws: WebSocket, session_id: str):
        await ws.accept()
        session = sessions.get(session_id)
        if session is None:
            await ws.send_json({"error": "unknown session"})
            await ws.close()
            return
        sim = _StreamSim(session)
        try:
            while True:
                # apply any pending control message, then advance + push
                try:
                    msg = await asyncio.wait_for(ws.receive_json(), timeout=0.05)
                    reply = sim.control(msg)
                    if reply is not None:
                        await ws.send_json(reply)
                except asyncio.TimeoutError:
                    pass
                except json.JSONDecodeError:
                    await ws.send_json({"error": "malformed control message"})
                frame = sim.advance()
                if frame is not None:
                    await ws.send_json(frame)
        except WebSocketDisconnect:
            pass
        finally:
            sim.release()

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


class _StreamSim:
    """Streamed MOT simulation bound to one websocket connection.

    Control messages: {"type": "start"|"pause"|"set-bias"|"set-modulation"}.
    Live bias changes take effect on the next integration step.
    """

    STEPS_PER_FRAME = 25
    DT = 20e-6
    MAX_ATOMS_PER_FRAME = 2000

    def __init__(self, session: Session):
        self.session = session
        self.running = False
        self.sim_time = 0.0
        self.source = None
        self.config = None
        self.species = None
        self.ensemble = None
        self.trap_seed = None
        self.frame_count = 0

    def control(self, msg: dict):
        kind = msg.get("type")
        if kind == "start":
            return self._start(msg)
        if kind == "pause":
            self.running = False
            return {"ok": "paused", "sim_time_s": self.sim_time}
        if kind == "resume":
            if self.source is not None:
                self.running = True
                return {"ok": "resumed"}
            return {"error": "no run to resume"}
        if kind == "set-bias":
            return self._set_bias(msg)
        if kind == "set-modulation":
            return self._set_modulation(msg)
        return {"error": f"unknown control {kind!r}"}

    def _start(self, msg: dict):
        with self.session.lock:
            sc = self.session.scenario
        if sc.mot is None:
            return {"error": "scenario has no mot section"}
        try:
            region = _region_from_dict(
                msg.get(
                    "region",
                    {"x_um": [-500, 500], "y_um": [-500, 500], "z_um": [50, 600]},
                ),
                "stream",
            )
        except scn.ScenarioError as e:
            return {"error": str(e)}
        source = sc.source()
        traps = find_zeros(source, region)
        if not traps:
            return {"error": "no trap found in the region"}
        trap = traps[0]
        from .fields import CachedPatternField

        box = (
            (trap.position[0] - 1e-3, trap.position[0] + 1e-3),
            (trap.position[1] - 1e-3, trap.position[1] + 1e-3),
            (max(trap.position[2] - 1e-3, 2e-5), trap.position[2] + 1e-3),
        )
        cache = CachedPatternField.build(source.pattern, box, (25, 25, 25))
        self.source = replace(source, pattern_cache=cache)
        axial = 1 if trap.principal_gradients[-1] >= 0 else -1
        self.config = sc.mot.config(center=tuple(trap.position), axial_gradient_sign=axial)
        self.species = sc.mot.species
        count = int(msg.get("count", 100))
        rng = np.random.default_rng(int(msg.get("seed", 0)))
        self.ensemble = AtomEnsemble.thermal(
            count, trap.position, 30e-6, 0.02, rng
        )
        self.trap_seed = trap.position
        self.region = region
        self.sim_time = 0.0
        self.running = True
        return {"ok": "started", "trap_um": (trap.position / UM).tolist()}

    def _set_bias(self, msg: dict):
        if self.source is None:
            return {"error": "no run in progress"}
        try:
            static = tuple(np.asarray(msg["static_uT"]) * UT)
        except (KeyError, TypeError, ValueError) as e:
            return {"error": f"set-bias: {e}"}
        bias = BiasField(static=static, modulation=self.source.bias.modulation)
        self.source = self.source.with_bias(bias)
        return {"ok": "bias updated"}

    def _set_modulation(self, msg: dict):
        if self.source is None:
            return {"error": "no run in progress"}
        try:
            modulation = Modulation(
                amplitude=tuple(np.asarray(msg["amplitude_uT"]) * UT),
                angular_frequency=2 * np.pi / msg["period_s"],
                phase=tuple(msg.get("phase_rad", (0.0, 0.0, 0.0))),
            )
        except (KeyError, TypeError, ValueError) as e:
            return {"error": f"set-modulation: {e}"}
        bias = BiasField(static=self.source.bias.static, modulation=modulation)
        self.source = self.source.with_bias(bias)
        return {"ok": "modulation updated"}

    def advance(self):
        if not self.running or self.source is None:
            return None
        for _ in range(self.STEPS_PER_FRAME):
            self.ensemble = step_ensemble(
                self.ensemble,
                self.config,
                self.species,
                self.source,
                self.DT,
                time=self.sim_time,
            )
            self.sim_time += self.DT
        # instantaneous trap position for the current bias
        from .traps import _refine_zero

        trap = _refine_zero(self.source, self.trap_seed, self.sim_time, self.region)
        if trap is not None:
            self.trap_seed = trap
        pos = self.ensemble.positions[: self.MAX_ATOMS_PER_FRAME]
        self.frame_count += 1
        return {
            "frame": self.frame_count,
            "sim_time_s": self.sim_time,
            "atoms_um": (pos / UM).tolist(),
            "alive": self.ensemble.alive[: self.MAX_ATOMS_PER_FRAME].tolist(),
            "trap_um": (np.asarray(self.trap_seed) / UM).tolist()
            if self.trap_seed is not None
            else None,
        }

    def release(self):
        self.running = False
        self.source = None
        self.ensemble = None
