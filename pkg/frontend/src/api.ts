/** Typed fetch client; server errors are thrown as ApiError. */

import type {
  ApiErrorBody,
  GenerationRequest,
  GenerationResponse,
  MetaResponse,
  MetricsResponse,
  SampleRecord,
} from "./types.js";

export class ApiError extends Error {
  body: ApiErrorBody;
  status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.body = body;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function request<T>(fetchImpl: FetchLike, url: string, init?: RequestInit): Promise<T> {
  const res = await fetchImpl(url, init);
  const body = await res.json();
  if (!res.ok) {
    throw new ApiError(res.status, body as ApiErrorBody);
  }
  return body as T;
}

export class ApiClient {
  constructor(private fetchImpl: FetchLike = (u, i) => fetch(u, i)) {}

  loadMeta(): Promise<MetaResponse> {
    return request<MetaResponse>(this.fetchImpl, "/api/meta");
  }

  loadSamples(level: number, limit = 8): Promise<{ samples: SampleRecord[] }> {
    return request(this.fetchImpl, `/api/samples?level=${level}&limit=${limit}`);
  }

  loadMetrics(): Promise<MetricsResponse> {
    return request(this.fetchImpl, "/api/metrics");
  }

  generate(req: GenerationRequest): Promise<GenerationResponse> {
    return request(this.fetchImpl, "/api/generate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }
}
