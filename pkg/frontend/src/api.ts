/** Thin fetch client plus latest-wins request sequencing.
 *
 * The explorer never computes model math: every number rendered comes out
 * of one of these calls.
 */

import type {
  AnswerDocument,
  GroupByDocument,
  QueryDocument,
  SchemaDocument,
  StatusDocument,
  SummaryListItem,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let detail = `${resp.status} ${resp.statusText}`;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body; keep the status line */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  listSummaries(): Promise<SummaryListItem[]> {
    return this.request("/summaries");
  }

  getSchema(summaryId: string): Promise<SchemaDocument> {
    return this.request(`/summaries/${summaryId}/schema`);
  }

  getStatus(summaryId: string): Promise<StatusDocument> {
    return this.request(`/summaries/${summaryId}/status`);
  }

  query(summaryId: string, query: QueryDocument): Promise<AnswerDocument> {
    return this.post(`/summaries/${summaryId}/query`, query);
  }

  groupBy(summaryId: string, query: QueryDocument): Promise<GroupByDocument> {
    return this.post(`/summaries/${summaryId}/groupby`, query);
  }
}

/** Latest-wins gate: one logical in-flight request per panel.
 *
 * Each `run` bumps the sequence number; a response belonging to a superseded
 * request resolves to `null` instead of reaching the panel.
 */
export class RequestSequencer {
  private seq = 0;

  async run<T>(work: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.seq;
    const result = await work();
    return ticket === this.seq ? result : null;
  }
}
