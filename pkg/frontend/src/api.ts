/** Thin API client with stale-response discarding.
 *
 * Each logical resource ("analysis", "embedding", ...) carries a
 * monotonically increasing request token; a response is dropped when a newer
 * request for the same resource was issued while it was in flight.
 */

import type { AnalysisPayload, EmbeddingPayload, GraphPayload, Meta } from "./types";

export class ApiClient {
  private tokens = new Map<string, number>();

  constructor(private readonly base: string = "") {}

  private async getJson<T>(resource: string, url: string): Promise<T | null> {
    const token = (this.tokens.get(resource) ?? 0) + 1;
    this.tokens.set(resource, token);
    const response = await fetch(this.base + url);
    if (this.tokens.get(resource) !== token) return null; // superseded
    if (!response.ok) {
      throw new Error(`${url} failed: HTTP ${response.status}`);
    }
    return (await response.json()) as T;
  }

  meta(): Promise<Meta | null> {
    return this.getJson<Meta>("meta", "/api/meta");
  }

  analysis(until?: number): Promise<AnalysisPayload | null> {
    const query = until === undefined ? "" : `?until=${until}`;
    return this.getJson<AnalysisPayload>("analysis", `/api/analysis${query}`);
  }

  embedding(): Promise<EmbeddingPayload | null> {
    return this.getJson<EmbeddingPayload>("embedding", "/api/embedding");
  }

  graph(fuzzer: string, compare?: string | null): Promise<GraphPayload | null> {
    const query = compare ? `?compare=${encodeURIComponent(compare)}` : "";
    return this.getJson<GraphPayload>(`graph:${fuzzer}`, `/api/graph/${fuzzer}${query}`);
  }
}
