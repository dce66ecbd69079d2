/** Thin client over the HTTP API.
 *
 * The dashboard never mutates artifacts: everything is a GET except POST
 * /chat and the explicit generate action.
 */

import {
  AssessmentPayload,
  ChatRequest,
  ChatResponse,
  ConceptMapPayload,
  SearchHitPayload,
  SeriesPayload,
  SessionSummary,
  TranscriptPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.request("/sessions");
  }

  getTranscript(discussionId: string): Promise<TranscriptPayload> {
    return this.request(`/discussions/${encodeURIComponent(discussionId)}/transcript`);
  }

  getConceptMap(discussionId: string): Promise<ConceptMapPayload> {
    return this.request(`/discussions/${encodeURIComponent(discussionId)}/concept-map`);
  }

  getAssessment(discussionId: string): Promise<AssessmentPayload> {
    return this.request(`/discussions/${encodeURIComponent(discussionId)}/assessment`);
  }

  getMetrics(discussionId: string): Promise<SeriesPayload> {
    return this.request(`/discussions/${encodeURIComponent(discussionId)}/metrics`);
  }

  search(query: string, kinds?: string[], n = 10): Promise<{ hits: SearchHitPayload[] }> {
    const params = new URLSearchParams({ q: query, n: String(n) });
    if (kinds && kinds.length) params.set("kinds", kinds.join(","));
    return this.request(`/search?${params.toString()}`);
  }

  chat(request: ChatRequest): Promise<ChatResponse> {
    return this.request("/chat", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  }

  /** Explicit user action; the only non-chat POST the dashboard issues. */
  generateArtifacts(discussionId: string): Promise<unknown> {
    return this.request(`/discussions/${encodeURIComponent(discussionId)}/artifacts`, {
      method: "POST",
    });
  }
}
