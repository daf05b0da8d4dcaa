// Thin typed client over the curation service. The fetch implementation is
// injected so tests can run without a browser or a live server.

import type {
  BucketCount,
  Decision,
  DecisionIn,
  HierarchyDoc,
  RelationView,
  Stats,
  SupportTriple,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Server rejected the request; `detail` is the violation text verbatim. */
export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

/** Request never reached the server (offline, refused, timeout). */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`network failure: ${String(cause)}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkError(err);
    }
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        const body = JSON.parse(text);
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // raw text is the detail
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  getBuckets(): Promise<BucketCount[]> {
    return this.request("/buckets");
  }

  getRelations(status: "unplaced" | "placed" | "all", bucket?: string): Promise<RelationView[]> {
    const params = new URLSearchParams({ status });
    if (bucket) params.set("bucket", bucket);
    return this.request(`/relations?${params}`);
  }

  getSupport(name: string, limit = 20): Promise<SupportTriple[]> {
    return this.request(`/relations/${encodeURIComponent(name)}/support?limit=${limit}`);
  }

  getHierarchy(): Promise<HierarchyDoc> {
    return this.request("/hierarchy");
  }

  getStats(): Promise<Stats> {
    return this.request("/stats");
  }

  postDecision(decision: DecisionIn): Promise<Decision> {
    return this.request("/decisions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(decision),
    });
  }

  getDecisions(since = 0): Promise<Decision[]> {
    return this.request(`/decisions?since=${since}`);
  }
}
