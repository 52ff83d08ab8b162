/** Small perceptually ordered colormap (viridis control points, linearly
 * interpolated) plus legend rendering helpers. */

export type Rgb = [number, number, number];

const STOPS: Rgb[] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

/** Map t in [0, 1] to an RGB triple; out-of-range values clamp. */
export function sampleColormap(t: number): Rgb {
  const clamped = Math.min(1, Math.max(0, t));
  const scaled = clamped * (STOPS.length - 1);
  const i = Math.min(Math.floor(scaled), STOPS.length - 2);
  const f = scaled - i;
  const a = STOPS[i];
  const b = STOPS[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

export interface NormalizedField {
  rgba: Uint8ClampedArray<ArrayBuffer>; // width*height*4, row-major
  vmin: number;
  vmax: number;
}

/** Color-map a row-major scalar field into RGBA bytes. The linear scale
 * (vmin, vmax) is returned so the caller can label the legend. */
export function fieldToRgba(
  values: ArrayLike<number>,
  width: number,
  height: number,
): NormalizedField {
  if (values.length !== width * height) {
    throw new Error(
      `field size ${values.length} does not match ${width}x${height}`,
    );
  }
  let vmin = Infinity;
  let vmax = -Infinity;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (v < vmin) vmin = v;
    if (v > vmax) vmax = v;
  }
  const span = vmax > vmin ? vmax - vmin : 1;
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < values.length; i++) {
    const [r, g, b] = sampleColormap((values[i] - vmin) / span);
    rgba[4 * i] = r;
    rgba[4 * i + 1] = g;
    rgba[4 * i + 2] = b;
    rgba[4 * i + 3] = 255;
  }
  return { rgba, vmin, vmax };
}

/** Horizontal legend strip (width x 1 RGBA row) from low to high. */
export function legendStrip(width: number): Uint8ClampedArray<ArrayBuffer> {
  const rgba = new Uint8ClampedArray(width * 4);
  for (let i = 0; i < width; i++) {
    const [r, g, b] = sampleColormap(width > 1 ? i / (width - 1) : 0);
    rgba[4 * i] = r;
    rgba[4 * i + 1] = g;
    rgba[4 * i + 2] = b;
    rgba[4 * i + 3] = 255;
  }
  return rgba;
}
