// Typed client over the registry service. The fetch function is
// injectable so tests can capture exact request bodies.

import type {
  Attribute,
  BucketDiffResponse,
  CombineRequest,
  CombineResponse,
  HealthResponse,
  SystemsResponse,
} from "./types.js";

export interface FetchResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponseLike>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

/** Canonical request body: fixed key order so a replayed request is
 * byte-identical to the original. */
export function encodeCombineRequest(req: CombineRequest): string {
  const doc: Record<string, unknown> = { method: req.method };
  if (req.systems !== undefined) doc.systems = req.systems;
  if (req.interval !== undefined) doc.interval = req.interval;
  return JSON.stringify(doc);
}

async function unwrap<T>(resp: FetchResponseLike): Promise<T> {
  let doc: unknown = null;
  try {
    doc = await resp.json();
  } catch {
    // structured detail unavailable; fall through to the status code
  }
  if (!resp.ok) {
    const detail =
      doc && typeof doc === "object" && "detail" in doc
        ? String((doc as { detail: unknown }).detail)
        : `request failed with status ${resp.status}`;
    throw new ApiError(resp.status, detail);
  }
  return doc as T;
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async health(): Promise<HealthResponse> {
    return unwrap(await this.fetchFn(this.url("/health")));
  }

  async systems(): Promise<SystemsResponse> {
    return unwrap(await this.fetchFn(this.url("/systems")));
  }

  /** POST /combine with an already-encoded body (see encodeCombineRequest);
   * passing the string keeps original submits and history replays
   * byte-identical. */
  async combineRaw(body: string): Promise<CombineResponse> {
    return unwrap(
      await this.fetchFn(this.url("/combine"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body,
      }),
    );
  }

  async combine(req: CombineRequest): Promise<CombineResponse> {
    return this.combineRaw(encodeCombineRequest(req));
  }

  async bucketDiff(attr: Attribute, a: string, b: string): Promise<BucketDiffResponse> {
    const query = new URLSearchParams({ attr, a, b }).toString();
    return unwrap(await this.fetchFn(this.url(`/buckets?${query}`)));
  }
}
