/** Typed client for the mopviz compute service.
 *
 * The fetch function is injected so tests can run against a fake transport.
 * Binary payloads (heights, positions, colors) arrive base64-encoded and are
 * decoded into typed arrays here.
 */

export interface ParamSchema {
  name: string;
  type: string;
  length?: number;
  default: unknown;
  min: number;
  max: number;
  doc?: string;
}

export interface CatalogEntry {
  id: string;
  family: string;
  p: number;
  k: number;
  params: ParamSchema[];
  defaults: Record<string, unknown>;
  default_resolution: number[];
}

export interface ProblemSpec {
  family: string;
  p: number;
  k: number;
  params: Record<string, unknown>;
}

export interface ComputeRequest {
  spec: ProblemSpec;
  resolution: number[];
  methods: string[];
  force?: boolean;
}

export interface JobInfo {
  id: string;
  status: "pending" | "ready" | "failed";
  error?: string | null;
}

export interface EfficientPoints {
  cells: number[];
  ranks: number[];
  positions_b64: string;
  rgb_b64: string;
}

export interface DatasetMeta {
  id: string;
  p: number;
  k: number;
  resolution: number[];
  lower: number[];
  upper: number[];
  methods: string[];
  efficient?: EfficientPoints;
  onion?: { low: number; high: number; max: number };
}

export interface ViewPayload {
  p: number;
  width: number;
  height: number;
  t_b64: string;
  rgb_b64: string;
  axis?: number;
  index?: number;
  plane_coord?: number;
  efficient?: EfficientPoints;
}

export interface OnionPayload {
  threshold: number;
  cells: number[];
  positions_b64: string;
}

export interface ObjectivePayload {
  k: number;
  count: number;
  points_b64: string;
  rgb_b64: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export function b64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

export function decodeF64(b64: string): Float64Array {
  const bytes = b64ToBytes(b64);
  return new Float64Array(bytes.buffer, 0, bytes.byteLength / 8);
}

export function decodeU8(b64: string): Uint8ClampedArray {
  return new Uint8ClampedArray(b64ToBytes(b64));
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private fetchFn: FetchLike, private base = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.json() as Promise<T>;
  }

  catalog(): Promise<CatalogEntry[]> {
    return this.get("/api/problems");
  }

  async compute(request: ComputeRequest): Promise<JobInfo> {
    const response = await this.fetchFn(this.base + "/api/compute", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response.json() as Promise<JobInfo>;
  }

  jobStatus(id: string): Promise<JobInfo> {
    return this.get(`/api/jobs/${id}`);
  }

  /** Poll until the job leaves the pending state. */
  async waitReady(id: string, intervalMs = 500,
                  onPoll?: (info: JobInfo) => void): Promise<JobInfo> {
    for (;;) {
      const info = await this.jobStatus(id);
      onPoll?.(info);
      if (info.status === "ready") return info;
      if (info.status === "failed") {
        throw new ApiError(500, info.error ?? "computation failed");
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  meta(id: string): Promise<DatasetMeta> {
    return this.get(`/api/data/${id}`);
  }

  view(id: string, method: string,
       slice?: { axis: number; index: number }): Promise<ViewPayload> {
    const query = slice ? `?axis=${slice.axis}&index=${slice.index}` : "";
    return this.get(`/api/data/${id}/${method}${query}`);
  }

  onion(id: string, threshold: number): Promise<OnionPayload> {
    return this.get(`/api/data/${id}/onion?threshold=${threshold}`);
  }

  objectiveSpace(id: string, source: string): Promise<ObjectivePayload> {
    return this.get(`/api/data/${id}/objective-space?source=${source}`);
  }

  exportUrl(id: string, name: string,
            slice?: { axis: number; index: number }): string {
    const query = slice ? `?axis=${slice.axis}&index=${slice.index}` : "";
    return `${this.base}/api/data/${id}/export/${name}${query}`;
  }
}
