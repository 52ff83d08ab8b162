/** View state: the session revision is monotone, and every overlay carries
 * the revision it was computed at; stale overlays are never rendered
 * against newer pattern state. */

import type { ToolKind } from "./types.js";

export type OverlayName =
  | "faraday"
  | "heatmap"
  | "traps"
  | "ring"
  | "cloud";

export interface Overlay<T = unknown> {
  revision: number;
  payload: T;
}

export interface BiasSliders {
  bx_uT: number;
  by_uT: number;
  bz_uT: number;
}

export interface ModulationControls {
  amplitude_uT: [number, number, number];
  phaseDifference_rad: number;
  period_s: number;
  playing: boolean;
}

export class ViewState {
  tool: ToolKind = "disk";
  bias: BiasSliders = { bx_uT: 0, by_uT: 0, bz_uT: 60 };
  modulation: ModulationControls = {
    amplitude_uT: [0, 0, 0],
    phaseDifference_rad: Math.PI / 2,
    period_s: 0.1,
    playing: false,
  };
  visible: Record<OverlayName, boolean> = {
    faraday: true,
    heatmap: true,
    traps: true,
    ring: false,
    cloud: false,
  };

  private _sessionId: string | null = null;
  private _revision = 0;
  private overlays = new Map<OverlayName, Overlay>();

  get sessionId(): string | null {
    return this._sessionId;
  }

  get revision(): number {
    return this._revision;
  }

  attachSession(id: string, revision: number): void {
    this._sessionId = id;
    this._revision = revision;
  }

  /** Accept a revision from a service response; never move backwards. */
  observeRevision(revision: number): void {
    if (revision > this._revision) this._revision = revision;
  }

  setOverlay<T>(name: OverlayName, revision: number, payload: T): void {
    this.overlays.set(name, { revision, payload });
    this.observeRevision(revision);
  }

  /** An overlay is renderable only when toggled on and fetched at the
   * current revision. */
  renderableOverlay<T>(name: OverlayName): Overlay<T> | null {
    if (!this.visible[name]) return null;
    const overlay = this.overlays.get(name);
    if (!overlay || overlay.revision !== this._revision) return null;
    return overlay as Overlay<T>;
  }

  /** Overlays left behind by a newer revision; callers refetch these. */
  staleOverlays(): OverlayName[] {
    const stale: OverlayName[] = [];
    for (const [name, overlay] of this.overlays) {
      if (overlay.revision !== this._revision) stale.push(name);
    }
    return stale;
  }
}
