/** Typed client for the measurement service.
 *
 * Every number the UI displays comes from these responses; the client
 * performs no angle math of its own.
 */

export interface MeshInfo {
  id: string;
  name: string;
  vertex_count: number;
  face_count: number;
  bounding_box: { min: number[]; max: number[] };
}

export interface MeshGeometry {
  positions: Float32Array; // 3 per vertex
  faces: Uint32Array; // 3 per triangle
  normals: Float32Array; // 3 per vertex
}

export interface MeasurementRequest {
  x?: number;
  y?: number;
  z?: number;
  seed?: number;
  radius: number;
  lambda?: number;
  metric?: "geodesic" | "euclidean";
  method?: "drag" | "xyz";
}

export interface PreviewResponse {
  theta_deg: number;
  fit: number;
  n_plus: number;
  n_minus: number;
  indices: number[];
  labels: number[];
  snap_distance: number;
}

export interface MeasurementRecord {
  id: number;
  mesh: string;
  method: string;
  x: number;
  y: number;
  z: number;
  radius: number;
  metric: string;
  lambda: number;
  n: number;
  n_plus: number;
  n_minus: number;
  theta_deg: number;
  fit: number;
  palette: number;
  timestamp: string;
  indices: number[];
  labels: number[];
}

export interface ServiceError {
  reason: string;
  detail?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly reason: string,
    detail?: string,
  ) {
    super(detail ?? reason);
  }
}

type FetchLike = typeof fetch;

export class GoniometerApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let reason = `HTTP ${resp.status}`;
      let detail: string | undefined;
      try {
        const body = (await resp.json()) as ServiceError;
        reason = body.reason ?? reason;
        detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, reason, detail);
    }
    return resp;
  }

  async health(): Promise<{ status: string; version: string }> {
    return (await this.request("/health")).json();
  }

  async listMeshes(): Promise<MeshInfo[]> {
    return (await this.request("/meshes")).json();
  }

  async uploadMesh(body: ArrayBuffer | Uint8Array, name: string): Promise<MeshInfo> {
    const resp = await this.request("/meshes", {
      method: "POST",
      headers: {
        "content-type": "application/octet-stream",
        "x-mesh-name": name,
      },
      body: body as BodyInit,
    });
    return resp.json();
  }

  async getGeometry(meshId: string): Promise<MeshGeometry> {
    const resp = await this.request(`/meshes/${meshId}/geometry`);
    return parseGeometry(await resp.arrayBuffer());
  }

  async preview(
    meshId: string,
    req: MeasurementRequest,
    signal?: AbortSignal,
  ): Promise<PreviewResponse> {
    const resp = await this.request(`/meshes/${meshId}/preview`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
      signal,
    });
    return resp.json();
  }

  async commit(meshId: string, req: MeasurementRequest): Promise<MeasurementRecord> {
    const resp = await this.request(`/meshes/${meshId}/measurements`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    return resp.json();
  }

  async downloadCsv(meshId: string): Promise<string> {
    return (await this.request(`/meshes/${meshId}/measurements.csv`)).text();
  }

  csvUrl(meshId: string): string {
    return `${this.baseUrl}/meshes/${meshId}/measurements.csv`;
  }
}

/** Binary layout: uint32 V, uint32 F, then V*3 float32 positions,
 *  F*3 uint32 face indices, V*3 float32 normals — all little-endian. */
export function parseGeometry(buffer: ArrayBuffer): MeshGeometry {
  if (buffer.byteLength < 8) {
    throw new Error("geometry payload truncated: missing header");
  }
  const view = new DataView(buffer);
  const v = view.getUint32(0, true);
  const f = view.getUint32(4, true);
  const expected = 8 + 12 * v + 12 * f + 12 * v;
  if (buffer.byteLength !== expected) {
    throw new Error(
      `geometry payload has ${buffer.byteLength} bytes, expected ${expected}`,
    );
  }
  let offset = 8;
  const positions = new Float32Array(buffer.slice(offset, offset + 12 * v));
  offset += 12 * v;
  const faces = new Uint32Array(buffer.slice(offset, offset + 12 * f));
  offset += 12 * f;
  const normals = new Float32Array(buffer.slice(offset, offset + 12 * v));
  return { positions, faces, normals };
}
