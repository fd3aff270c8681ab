/** Wire types for the generation service API. */

export interface MetaResponse {
  variant: string;
  lambda: number;
  levels: number;
  dims: {
    n: number;
    m: number;
    z: number;
    d: number;
    latent: number;
    hidden: number;
    t: number;
  };
  dataset: { test_count: number; per_level: Record<string, number> };
}

export interface SampleRecord {
  id: number;
  level: number;
  config: number[][][];
  zones: number[][];
}

export interface GenerationRequest {
  green_level: number;
  context: { sample_id?: number; features?: number[][] };
  count?: number;
  seed?: number;
  round?: boolean;
}

export interface GenerationResponse {
  configurations: number[][][][];
  per_category_totals: number[][];
  latency_ms: number;
  seed: number;
}

export interface ApiErrorBody {
  error: string;
  message: string;
  fields?: { field: string; message: string }[];
}

export interface MetricsResponse {
  avg_kl: number;
  avg_js: number;
  avg_hd: number;
  avg_cos: number;
  per_level: {
    level: number;
    weight: number;
    kl: number | null;
    js: number | null;
    hd: number | null;
    cos: number | null;
  }[];
}
