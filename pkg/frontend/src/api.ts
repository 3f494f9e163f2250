import type {
  BranchResponse,
  ReviewResponse,
  SlideDocPayload,
  SlideView,
  TraceResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number,
    public readonly kind: string = "error",
    public readonly detail: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

/** Thin typed client over the session HTTP API; every document shown in the
 * UI comes back through one of these calls. */
export class SlideloopClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const text = await response.text();
    let body: unknown = null;
    try {
      body = text ? JSON.parse(text) : null;
    } catch {
      body = null;
    }
    if (!response.ok) {
      const error = (body as { error?: Record<string, unknown> } | null)?.error ?? {};
      throw new ApiError(
        String(error["message"] ?? `request failed (${response.status})`),
        response.status,
        String(error["kind"] ?? "error"),
        error,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createSession(slide: SlideDocPayload): Promise<SlideView> {
    return this.post<SlideView>("/sessions", { slide });
  }

  getSlide(sessionId: string): Promise<SlideView> {
    return this.request<SlideView>(`/sessions/${sessionId}/slide`);
  }

  branch(sessionId: string, n: number, seed = 0): Promise<BranchResponse> {
    return this.post<BranchResponse>(`/sessions/${sessionId}/branch`, { n, seed });
  }

  select(sessionId: string, branchId: string): Promise<SlideView> {
    return this.post<SlideView>(`/sessions/${sessionId}/select`, {
      branch_id: branchId,
    });
  }

  applyLabels(sessionId: string, elementIds: string[]): Promise<SlideView> {
    return this.post<SlideView>(`/sessions/${sessionId}/labels`, {
      element_ids: elementIds,
    });
  }

  review(sessionId: string): Promise<ReviewResponse> {
    return this.post<ReviewResponse>(`/sessions/${sessionId}/review`, {});
  }

  trace(sessionId: string): Promise<TraceResponse> {
    return this.request<TraceResponse>(`/sessions/${sessionId}/trace`);
  }

  exportUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/export.pptx`;
  }

  healthz(): Promise<{ status: string }> {
    return this.request<{ status: string }>("/healthz");
  }
}
