/** Typed client for the evaluation service.
 *
 * All session mutations and every number the UI shows go through these
 * endpoints; the browser talks to nothing else (in particular, never to a
 * model endpoint directly).
 */

import type {
  ApiErrorBody,
  Comparison,
  IniReport,
  LiveStats,
  OutcomeTag,
  PlotSeries,
  PredictionsUploadResult,
  PromptResult,
  SessionEvent,
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
  readonly code: string;
  readonly detail: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export class ServiceClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? (globalThis.fetch as unknown as FetchLike);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: { method: string; headers?: Record<string, string>; body?: string } = {
      method,
    };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const payload = (await response.json()) as unknown;
    if (!response.ok) {
      const errorBody = payload as Partial<ApiErrorBody>;
      throw new ApiError(response.status, {
        code: errorBody.code ?? "unknown_error",
        message: errorBody.message ?? `HTTP ${response.status}`,
        detail: errorBody.detail ?? "",
      });
    }
    return payload as T;
  }

  createSession(frameworkLabel: string, taskLabel: string): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions", {
      framework_label: frameworkLabel,
      task_label: taskLabel,
    });
  }

  postPrompt(sessionId: string, text: string, newAttempt: boolean): Promise<PromptResult> {
    return this.request("POST", `/sessions/${sessionId}/prompts`, {
      text,
      new_attempt: newAttempt,
    });
  }

  tagOutcome(sessionId: string, tag: OutcomeTag): Promise<{ acknowledged: boolean; state: string }> {
    return this.request("POST", `/sessions/${sessionId}/outcome`, { tag });
  }

  getStats(sessionId: string): Promise<LiveStats> {
    return this.request("GET", `/sessions/${sessionId}/stats`);
  }

  getEvents(sessionId: string): Promise<{ session_id: string; events: SessionEvent[] }> {
    return this.request("GET", `/sessions/${sessionId}/events`);
  }

  submitPredictions(
    sessionId: string,
    predictions: Record<string, number[]>,
    truth: Record<string, number[]>,
  ): Promise<PredictionsUploadResult> {
    return this.request("POST", `/sessions/${sessionId}/predictions`, { predictions, truth });
  }

  getIni(sessionId: string): Promise<IniReport> {
    return this.request("GET", `/sessions/${sessionId}/ini`);
  }

  compare(sessionIds: string[]): Promise<Comparison> {
    const ids = encodeURIComponent(sessionIds.join(","));
    return this.request("GET", `/compare?ids=${ids}`);
  }

  getPlot(sessionId: string, variable?: string, window?: { start: number; end: number }): Promise<PlotSeries> {
    const params = new URLSearchParams();
    if (variable) params.set("variable", variable);
    if (window) params.set("window", `${window.start}:${window.end}`);
    const query = params.toString();
    return this.request("GET", `/plots/${sessionId}${query ? "?" + query : ""}`);
  }
}
