/** Page wiring: session lifecycle, canvas gestures, bias/modulation
 * controls, overlay fetching and rendering. */

import { StaleRevisionError, StudioApi } from "./api.js";
import { legendStrip, fieldToRgba } from "./colormap.js";
import { FilmMapping, gestureToEdit, type Point } from "./editor.js";
import { ViewState } from "./state.js";
import { StreamClient } from "./ws.js";
import type {
  RegionDoc,
  ScenarioDoc,
  StreamFrame,
  ToolKind,
  TrapInfo,
} from "./types.js";

const EXTENT_UM: [number, number] = [4000, 4000];
const HEATMAP_Z_UM = 200;
const TRAP_REGION: RegionDoc = {
  x_um: [-1800, 1800],
  y_um: [-1800, 1800],
  z_um: [60, 500],
  seeds: [5, 5, 4],
};

function defaultScenario(): ScenarioDoc {
  return {
    film: {
      thickness_um: 1.8,
      remanence_mT: 20,
      extent_mm: [4, 4],
      cell_size_um: 2,
    },
    initial_polarity: 1,
    edits: [],
    bias: { static_uT: [0, 0, 60] },
    mot: { beam_power_mW: 5 },
    directives: [],
  };
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

class StudioPage {
  private readonly api = new StudioApi();
  private readonly state = new ViewState();
  private readonly mapping: FilmMapping;
  private stream: StreamClient | null = null;
  private pressPoint: Point | null = null;
  private lastFrame: StreamFrame | null = null;

  private readonly pattern = el<HTMLCanvasElement>("pattern-canvas");
  private readonly heatmap = el<HTMLCanvasElement>("heatmap-canvas");
  private readonly overlay = el<HTMLCanvasElement>("overlay-canvas");
  private readonly legend = el<HTMLCanvasElement>("legend-canvas");
  private readonly banner = el<HTMLDivElement>("banner");

  constructor() {
    this.mapping = new FilmMapping(
      this.pattern.width,
      this.pattern.height,
      EXTENT_UM,
    );
  }

  async start(): Promise<void> {
    const session = await this.api.createSession(defaultScenario());
    this.state.attachSession(session.id, session.revision);
    this.bindControls();
    this.drawLegend();
    await this.refreshOverlays();
  }

  private bindControls(): void {
    for (const tool of [
      "disk",
      "rect",
      "annulus",
      "stroke",
      "erase",
      "optical-zero",
    ] as ToolKind[]) {
      el<HTMLButtonElement>(`tool-${tool}`).addEventListener("click", () => {
        this.state.tool = tool;
        document
          .querySelectorAll(".tool.active")
          .forEach((n) => n.classList.remove("active"));
        el(`tool-${tool}`).classList.add("active");
      });
    }

    this.overlay.addEventListener("mousedown", (ev) => {
      this.pressPoint = { x: ev.offsetX, y: ev.offsetY };
    });
    this.overlay.addEventListener("mouseup", (ev) => {
      if (!this.pressPoint) return;
      const release = { x: ev.offsetX, y: ev.offsetY };
      const press = this.pressPoint;
      this.pressPoint = null;
      void this.commitGesture(press, release);
    });

    for (const axis of ["bx", "by", "bz"] as const) {
      el<HTMLInputElement>(`bias-${axis}`).addEventListener("change", () => {
        void this.pushBias();
      });
    }
    el<HTMLButtonElement>("modulation-play").addEventListener("click", () => {
      void this.toggleStream();
    });
  }

  private biasFromSliders(): [number, number, number] {
    return [
      Number(el<HTMLInputElement>("bias-bx").value),
      Number(el<HTMLInputElement>("bias-by").value),
      Number(el<HTMLInputElement>("bias-bz").value),
    ];
  }

  private async commitGesture(press: Point, release: Point): Promise<void> {
    const id = this.state.sessionId;
    if (!id) return;
    const edit = gestureToEdit(
      this.state.tool,
      this.mapping,
      press,
      release,
      1,
    );
    if (!edit) return;
    try {
      const { revision } = await this.api.appendEdits(
        id,
        this.state.revision,
        [edit],
      );
      this.state.observeRevision(revision);
      await this.refreshOverlays();
    } catch (err) {
      if (err instanceof StaleRevisionError) {
        const session = await this.api.getSession(id);
        this.state.observeRevision(session.revision);
        this.showBanner("session changed elsewhere; edit not applied — retry");
      } else {
        this.showBanner(String(err));
      }
    }
  }

  private async pushBias(): Promise<void> {
    const id = this.state.sessionId;
    if (!id) return;
    const staticUt = this.biasFromSliders();
    if (this.stream?.connected) {
      this.stream.send({ type: "set-bias", static_uT: staticUt });
      return;
    }
    try {
      const { revision } = await this.api.setBias(
        id,
        this.state.revision,
        staticUt,
      );
      this.state.observeRevision(revision);
      await this.refreshOverlays();
    } catch (err) {
      this.showBanner(String(err));
    }
  }

  private async refreshOverlays(): Promise<void> {
    const id = this.state.sessionId;
    if (!id) return;
    const faraday = el<HTMLImageElement>("faraday-img");
    faraday.src = `${this.api.faradayUrl(id)}?r=${this.state.revision}`;

    const grid = await this.api.gridBinary(id, {
      z_um: HEATMAP_Z_UM,
      nx: this.heatmap.width,
      ny: this.heatmap.height,
    });
    this.state.setOverlay("heatmap", grid.header.revision, grid);

    const traps = await this.api.traps(id, TRAP_REGION);
    this.state.setOverlay("traps", traps.revision, traps.traps);

    this.render();
  }

  private render(): void {
    const heat = this.state.renderableOverlay<{
      header: { width: number; height: number };
      values: Float64Array;
    }>("heatmap");
    if (heat) {
      const { width, height } = heat.payload.header;
      const { rgba, vmin, vmax } = fieldToRgba(
        heat.payload.values,
        width,
        height,
      );
      const ctx = this.heatmap.getContext("2d")!;
      ctx.putImageData(new ImageData(rgba, width, height), 0, 0);
      el("legend-min").textContent = `${(vmin * 1e6).toFixed(1)} uT`;
      el("legend-max").textContent = `${(vmax * 1e6).toFixed(1)} uT`;
    }

    const ctx = this.overlay.getContext("2d")!;
    ctx.clearRect(0, 0, this.overlay.width, this.overlay.height);
    const traps = this.state.renderableOverlay<TrapInfo[]>("traps");
    if (traps) {
      ctx.strokeStyle = "#ff5050";
      ctx.lineWidth = 2;
      for (const trap of traps.payload) {
        const [px, py] = this.mapping.toCanvas(
          trap.position_um[0],
          trap.position_um[1],
        );
        ctx.beginPath();
        ctx.arc(px, py, 6, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
    if (this.lastFrame && this.state.visible.cloud) {
      ctx.fillStyle = "#59f";
      for (let i = 0; i < this.lastFrame.atoms_um.length; i++) {
        if (!this.lastFrame.alive[i]) continue;
        const [ax, ay] = this.lastFrame.atoms_um[i];
        const [px, py] = this.mapping.toCanvas(ax, ay);
        ctx.fillRect(px - 1, py - 1, 3, 3);
      }
      if (this.lastFrame.trap_um) {
        const [tx, ty] = this.lastFrame.trap_um;
        const [px, py] = this.mapping.toCanvas(tx, ty);
        ctx.strokeStyle = "#ffd24d";
        ctx.beginPath();
        ctx.arc(px, py, 8, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }
    el("revision-label").textContent = `revision ${this.state.revision}`;
  }

  private async toggleStream(): Promise<void> {
    const id = this.state.sessionId;
    if (!id) return;
    if (this.stream?.connected) {
      this.stream.send({ type: "pause" });
      this.stream.close();
      this.stream = null;
      this.state.visible.cloud = false;
      this.render();
      return;
    }
    const phi = this.state.modulation.phaseDifference_rad;
    await this.api.setBias(id, this.state.revision, this.biasFromSliders(), {
      amplitude_uT: [27, 27, 0],
      period_s: this.state.modulation.period_s,
      phase_rad: [0, phi, 0],
    });
    const session = await this.api.getSession(id);
    this.state.observeRevision(session.revision);
    this.state.visible.cloud = true;
    this.stream = new StreamClient(
      this.api.streamUrl(id, location.origin),
      {
        onFrame: (frame) => {
          this.lastFrame = frame;
          this.render();
        },
        onError: (err) => this.showBanner(err.error),
        onClose: () => this.showBanner("stream closed"),
      },
    );
    this.stream.connect();
    this.stream.send({ type: "start", count: 60 });
  }

  private drawLegend(): void {
    const ctx = this.legend.getContext("2d")!;
    const strip = legendStrip(this.legend.width);
    const row = new ImageData(strip, this.legend.width, 1);
    for (let y = 0; y < this.legend.height; y++) {
      ctx.putImageData(row, 0, y);
    }
  }

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.classList.add("visible");
    setTimeout(() => this.banner.classList.remove("visible"), 4000);
  }
}

void new StudioPage().start().catch((err) => {
  document.body.insertAdjacentText("beforeend", `failed to start: ${err}`);
});
