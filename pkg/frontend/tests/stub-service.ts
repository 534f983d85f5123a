/** Scripted stand-in for the evaluation service, used by the unit tests.
 *
 * Plays the server role: serves scripted prompt outcomes, keeps the
 * query/attempt/SB counters the way the real service derives them from its
 * event log, and records every HTTP call so tests can assert ordering and
 * bodies. The view models under test must treat these payloads as the single
 * source of truth.
 */

import type { FetchLike, FetchResponseLike } from "../src/api.js";
import type { IniReport, LiveStats, PromptResult } from "../src/types.js";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

interface StubOptions {
  promptScript?: PromptResult[];
  iniReports?: Record<string, IniReport>;
  comparison?: unknown;
  plots?: Record<string, unknown>;
}

export class StubService {
  readonly calls: RecordedCall[] = [];
  private promptScript: PromptResult[];
  private iniReports: Record<string, IniReport>;
  private comparison: unknown;
  private plots: Record<string, unknown>;
  private nextSession = 1;

  private counters = { attempts_q: 0, total_queries_n: 0, sb_count: 0 };
  private latencies: number[] = [];
  private events: { seq: number; ts: string; kind: string; payload: Record<string, unknown> }[] =
    [];

  constructor(options: StubOptions = {}) {
    this.promptScript = [...(options.promptScript ?? [])];
    this.iniReports = options.iniReports ?? {};
    this.comparison = options.comparison ?? { ranking: [], tables: {} };
    this.plots = options.plots ?? {};
  }

  get fetch(): FetchLike {
    return (url, init) => this.handle(url, init);
  }

  private respond(status: number, body: unknown): Promise<FetchResponseLike> {
    return Promise.resolve({
      ok: status >= 200 && status < 300,
      status,
      json: () => Promise.resolve(body),
    });
  }

  private pushEvent(kind: string, payload: Record<string, unknown> = {}): void {
    this.events.push({
      seq: this.events.length + 1,
      ts: new Date().toISOString(),
      kind,
      payload,
    });
  }

  private handle(url: string, init?: { method?: string; body?: string }): Promise<FetchResponseLike> {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(init.body) : undefined;
    this.calls.push({ method, path, body });

    if (method === "POST" && path === "/sessions") {
      this.pushEvent("session_opened", { schema: 1 });
      return this.respond(200, { session_id: `s${this.nextSession++}` });
    }
    if (method === "POST" && /^\/sessions\/[^/]+\/prompts$/.test(path)) {
      const result = this.promptScript.shift();
      if (!result) return this.respond(500, { code: "exhausted", message: "no scripted result", detail: "" });
      if (body.new_attempt) {
        this.counters.attempts_q += 1;
        this.pushEvent("attempt_started");
      }
      this.counters.total_queries_n += 1;
      this.pushEvent("query_sent", { prompt: body.text });
      if (result.status === "server_busy") {
        this.counters.sb_count += 1;
        this.pushEvent("sb_detected", { wait_s: result.latency_s });
      } else {
        this.latencies.push(result.latency_s);
        this.pushEvent("response_received", { latency_s: result.latency_s, text: result.text });
      }
      return this.respond(200, result);
    }
    if (method === "POST" && /^\/sessions\/[^/]+\/outcome$/.test(path)) {
      this.pushEvent("outcome_tagged", { tag: body.tag });
      if (body.tag === "accepted") this.pushEvent("session_closed", { status: "completed" });
      return this.respond(200, { acknowledged: true, state: body.tag === "accepted" ? "closed" : "tagged" });
    }
    if (method === "GET" && /^\/sessions\/[^/]+\/stats$/.test(path)) {
      const artpq =
        this.latencies.length > 0
          ? this.latencies.reduce((a, b) => a + b, 0) / this.latencies.length
          : null;
      const stats: LiveStats = {
        framework_label: "GPT",
        task_label: "t",
        ...this.counters,
        response_times_s: [...this.latencies],
        state: "open",
        artpq_s: artpq,
        provisional: {
          e_sbr:
            this.counters.total_queries_n > 0
              ? 1 - this.counters.sb_count / this.counters.total_queries_n
              : null,
          e_art: artpq === null ? null : artpq <= 10 ? 1 : artpq < 30 ? 0.5 : 0,
          e: null,
          c: this.counters.attempts_q >= 1 ? 1 / (1 + Math.log(this.counters.attempts_q)) : null,
        },
      };
      return this.respond(200, stats);
    }
    if (method === "GET" && /^\/sessions\/[^/]+\/events$/.test(path)) {
      return this.respond(200, { session_id: "s1", events: this.events });
    }
    if (method === "GET" && /^\/sessions\/[^/]+\/ini$/.test(path)) {
      const id = path.split("/")[2] ?? "";
      const report = this.iniReports[id];
      if (!report) {
        return this.respond(409, {
          code: "incomplete_session",
          message: "no predictions",
          detail: "",
        });
      }
      return this.respond(200, report);
    }
    if (method === "GET" && path.startsWith("/compare")) {
      return this.respond(200, this.comparison);
    }
    if (method === "GET" && path.startsWith("/plots/")) {
      const cleaned = path.slice("/plots/".length);
      const [id, query = ""] = cleaned.split("?");
      const decoded = decodeURIComponent(query);
      const key = decoded.length > 0 ? `${id}?${decoded}` : (id ?? "");
      const plot = this.plots[key] ?? this.plots[id ?? ""];
      if (!plot) return this.respond(404, { code: "unknown_session", message: "?", detail: "" });
      return this.respond(200, plot);
    }
    return this.respond(404, { code: "unknown_route", message: path, detail: "" });
  }
}

export function answer(latencyS: number, text: string): PromptResult {
  return { status: "answer", latency_s: latencyS, text, detail: null };
}

export function serverBusy(latencyS: number): PromptResult {
  return { status: "server_busy", latency_s: latencyS, text: null, detail: "HTTP 429" };
}
