/** Wire types shared with the HTTP/websocket service. All lengths are in
 * micrometres and all fields in microtesla unless a suffix says otherwise,
 * matching the service's unit-suffixed JSON keys. */

export type WriteFieldSign = -1 | 0 | 1;

export interface DiskShape {
  type: "disk";
  center_um: [number, number];
  radius_um: number;
}

export interface RectangleShape {
  type: "rectangle";
  corner_um: [number, number];
  size_um: [number, number];
}

export interface AnnulusShape {
  type: "annulus";
  center_um: [number, number];
  r_inner_um: number;
  r_outer_um: number;
}

export interface StrokeShape {
  type: "stroke";
  polyline_um: [number, number][];
  width_um: number;
}

export type ShapeDoc = DiskShape | RectangleShape | AnnulusShape | StrokeShape;

export interface EditOpDoc {
  kind: "stamp";
  shape: ShapeDoc;
  write_field_sign: WriteFieldSign;
  beam_power_mW: number;
  spot_diameter_um: number;
}

export interface ModulationDoc {
  amplitude_uT: [number, number, number];
  period_s: number;
  phase_rad: [number, number, number];
}

export interface BiasDoc {
  static_uT: [number, number, number];
  modulation?: ModulationDoc;
}

export interface FilmDoc {
  thickness_um: number;
  remanence_mT: number;
  extent_mm: [number, number];
  cell_size_um: number;
}

export interface ScenarioDoc {
  film: FilmDoc;
  initial_polarity: 1 | -1;
  edits: EditOpDoc[];
  bias: BiasDoc;
  mot?: Record<string, number>;
  directives: unknown[];
}

export interface SessionView {
  id: string;
  revision: number;
  scenario: ScenarioDoc;
}

export interface TrapInfo {
  position_um: [number, number, number];
  residual_T: number;
  principal_gradients_Tpm: [number, number, number];
  classification: string;
}

export interface TrapsResponse {
  revision: number;
  traps: TrapInfo[];
}

export interface TransportResponse {
  revision: number;
  times_s: number[];
  positions_um: [number, number, number][];
  lost_at: number | null;
}

export interface GridHeader {
  width: number;
  height: number;
  z_um: number;
  revision: number;
  dtype: "float64-le";
  units: "T";
  order: "row-major";
}

/** Row-major |B| samples decoded from the binary grid endpoint. */
export interface BinaryGrid {
  header: GridHeader;
  values: Float64Array;
}

export interface StreamFrame {
  frame: number;
  sim_time_s: number;
  atoms_um: [number, number, number][];
  alive: boolean[];
  trap_um: [number, number, number] | null;
}

export interface StreamAck {
  ok: string;
  [key: string]: unknown;
}

export interface StreamError {
  error: string;
}

export type StreamControl =
  | { type: "start"; count?: number; seed?: number; region?: RegionDoc }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "set-bias"; static_uT: [number, number, number] }
  | {
      type: "set-modulation";
      amplitude_uT: [number, number, number];
      period_s: number;
      phase_rad?: [number, number, number];
    };

export interface RegionDoc {
  x_um: [number, number];
  y_um: [number, number];
  z_um: [number, number];
  seeds?: [number, number, number];
}

export type ToolKind =
  | "disk"
  | "rect"
  | "annulus"
  | "stroke"
  | "erase"
  | "optical-zero";
