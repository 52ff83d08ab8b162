/** Typed HTTP client for the studio service. The UI performs no physics:
 * every displayed number comes back from these endpoints. */

import type {
  BinaryGrid,
  EditOpDoc,
  GridHeader,
  ModulationDoc,
  RegionDoc,
  ScenarioDoc,
  SessionView,
  TransportResponse,
  TrapsResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`service error ${status}: ${detail}`);
  }
}

/** A mutation raced another client; refetch the session and reapply. */
export class StaleRevisionError extends ApiError {
  constructor(detail: string) {
    super(409, detail);
  }
}

export type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  if (res.status === 409) throw new StaleRevisionError(detail);
  throw new ApiError(res.status, detail);
}

export interface GridRequest {
  z_um: number;
  x_um?: [number, number];
  y_um?: [number, number];
  nx?: number;
  ny?: number;
}

export class StudioApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchFn = (url, init) => fetch(url, init),
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + url, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    await raiseForStatus(res);
    return (await res.json()) as T;
  }

  createSession(scenario: ScenarioDoc): Promise<SessionView> {
    return this.json("/api/session", {
      method: "POST",
      body: JSON.stringify(scenario),
    });
  }

  getSession(id: string): Promise<SessionView> {
    return this.json(`/api/session/${id}`);
  }

  appendEdits(
    id: string,
    baseRevision: number,
    edits: EditOpDoc[],
  ): Promise<{ revision: number }> {
    return this.json(`/api/session/${id}/edits`, {
      method: "POST",
      body: JSON.stringify({ base_revision: baseRevision, edits }),
    });
  }

  setBias(
    id: string,
    baseRevision: number,
    static_uT: [number, number, number],
    modulation?: ModulationDoc,
  ): Promise<{ revision: number }> {
    return this.json(`/api/session/${id}/bias`, {
      method: "PUT",
      body: JSON.stringify({
        base_revision: baseRevision,
        static_uT,
        modulation: modulation ?? null,
      }),
    });
  }

  traps(id: string, region: RegionDoc): Promise<TrapsResponse> {
    return this.json(`/api/session/${id}/traps`, {
      method: "POST",
      body: JSON.stringify(region),
    });
  }

  transport(
    id: string,
    region: RegionDoc,
    samples = 16,
  ): Promise<TransportResponse> {
    return this.json(`/api/session/${id}/transport`, {
      method: "POST",
      body: JSON.stringify({ ...region, samples }),
    });
  }

  async gridBinary(id: string, request: GridRequest): Promise<BinaryGrid> {
    const res = await this.fetchFn(`${this.baseUrl}/api/session/${id}/grid`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ ...request, format: "binary" }),
    });
    await raiseForStatus(res);
    return parseBinaryGrid(await res.arrayBuffer());
  }

  /** Faraday-style magnetization image; tag the <img> with the revision
   * from the X-Revision response header. */
  faradayUrl(id: string): string {
    return `${this.baseUrl}/api/session/${id}/faraday`;
  }

  streamUrl(id: string, origin: string): string {
    const ws = origin.replace(/^http/, "ws");
    return `${ws}/api/session/${id}/stream`;
  }
}

/** Decode the binary grid payload: one JSON header line, then row-major
 * little-endian float64 |B| samples. */
export function parseBinaryGrid(buffer: ArrayBuffer): BinaryGrid {
  const bytes = new Uint8Array(buffer);
  const newline = bytes.indexOf(0x0a);
  if (newline < 0) throw new Error("binary grid: missing header line");
  const header = JSON.parse(
    new TextDecoder().decode(bytes.subarray(0, newline)),
  ) as GridHeader;
  if (header.dtype !== "float64-le") {
    throw new Error(`binary grid: unsupported dtype ${header.dtype}`);
  }
  const count = header.width * header.height;
  const payload = bytes.subarray(newline + 1);
  if (payload.byteLength !== count * 8) {
    throw new Error(
      `binary grid: expected ${count * 8} payload bytes, got ${payload.byteLength}`,
    );
  }
  // copy to guarantee 8-byte alignment regardless of the header length
  const aligned = new Uint8Array(count * 8);
  aligned.set(payload);
  return { header, values: new Float64Array(aligned.buffer) };
}
