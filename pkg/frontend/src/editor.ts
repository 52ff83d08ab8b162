/** Pure editor geometry: canvas pixels <-> film-plane micrometres, and
 * drag gestures -> edit operations posted to the service. */

import type { EditOpDoc, ShapeDoc, ToolKind, WriteFieldSign } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

/** Maps canvas pixel coordinates to film-plane micrometres. The film is
 * centred, x grows right, y grows up (canvas y grows down). */
export class FilmMapping {
  constructor(
    readonly canvasWidth: number,
    readonly canvasHeight: number,
    readonly extentUm: [number, number],
  ) {
    if (canvasWidth <= 0 || canvasHeight <= 0) {
      throw new Error("canvas dimensions must be positive");
    }
  }

  toFilm(px: number, py: number): [number, number] {
    const [ex, ey] = this.extentUm;
    const x = (px / this.canvasWidth - 0.5) * ex;
    const y = (0.5 - py / this.canvasHeight) * ey;
    return [x, y];
  }

  toCanvas(xUm: number, yUm: number): [number, number] {
    const [ex, ey] = this.extentUm;
    const px = (xUm / ex + 0.5) * this.canvasWidth;
    const py = (0.5 - yUm / ey) * this.canvasHeight;
    return [px, py];
  }

  /** Scalar length conversion (isotropic only when the aspect matches). */
  lengthToFilm(pixels: number): number {
    return (pixels / this.canvasWidth) * this.extentUm[0];
  }
}

export interface WriteBeam {
  beam_power_mW: number;
  spot_diameter_um: number;
}

export const DEFAULT_BEAM: WriteBeam = {
  beam_power_mW: 20,
  spot_diameter_um: 10,
};

/** Ratio between inner and outer radius for one-drag annulus gestures. */
export const ANNULUS_INNER_RATIO = 0.55;

function toolSign(tool: ToolKind, filmPolarity: 1 | -1): WriteFieldSign {
  if (tool === "erase") return filmPolarity; // restore the background
  if (tool === "optical-zero") return 0; // heat with no write field
  return (-filmPolarity) as WriteFieldSign; // stamp against the background
}

/** Convert a press-drag-release gesture into an edit operation, or null
 * for degenerate gestures (zero-size shapes). */
export function gestureToEdit(
  tool: ToolKind,
  mapping: FilmMapping,
  press: Point,
  release: Point,
  filmPolarity: 1 | -1,
  beam: WriteBeam = DEFAULT_BEAM,
  strokeWidthUm = 10,
): EditOpDoc | null {
  const [x0, y0] = mapping.toFilm(press.x, press.y);
  const [x1, y1] = mapping.toFilm(release.x, release.y);
  const radius = Math.hypot(x1 - x0, y1 - y0);

  let shape: ShapeDoc | null = null;
  switch (tool) {
    case "disk":
    case "erase":
    case "optical-zero":
      if (radius <= 0) return null;
      shape = { type: "disk", center_um: [x0, y0], radius_um: radius };
      break;
    case "rect": {
      const cornerX = Math.min(x0, x1);
      const cornerY = Math.min(y0, y1);
      const w = Math.abs(x1 - x0);
      const h = Math.abs(y1 - y0);
      if (w <= 0 || h <= 0) return null;
      shape = { type: "rectangle", corner_um: [cornerX, cornerY], size_um: [w, h] };
      break;
    }
    case "annulus":
      if (radius <= 0) return null;
      shape = {
        type: "annulus",
        center_um: [x0, y0],
        r_inner_um: ANNULUS_INNER_RATIO * radius,
        r_outer_um: radius,
      };
      break;
    case "stroke":
      if (radius <= 0) return null;
      shape = {
        type: "stroke",
        polyline_um: [
          [x0, y0],
          [x1, y1],
        ],
        width_um: strokeWidthUm,
      };
      break;
  }
  if (!shape) return null;
  return {
    kind: "stamp",
    shape,
    write_field_sign: toolSign(tool, filmPolarity),
    ...beam,
  };
}
