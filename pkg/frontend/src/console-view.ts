/** Session console state: a thin mirror of the server-side session machine.
 *
 * Every mutation round-trips through the service; counters and gauges are
 * copied from the server's stats response after each change, never computed
 * here. The single source of truth is the server.
 */

import type { ServiceClient } from "./api.js";
import type { LiveStats, OutcomeTag, PromptResult } from "./types.js";

export type ConsolePhase =
  | "ready" // a new attempt may be typed
  | "waiting" // a prompt is in flight
  | "answered" // last query got an answer; tag it or follow up
  | "busy" // last query got server-busy; retry or tag
  | "accepted"; // accepted outcome recorded; session closed

export interface TranscriptEntry {
  prompt: string;
  newAttempt: boolean;
  status: PromptResult["status"];
  response: string | null;
  latencyS: number; // server-reported
  tag: OutcomeTag | null;
}

export interface ConsoleViewModel {
  phase: ConsolePhase;
  canPrompt: boolean;
  canTag: boolean;
  busyBadge: boolean;
  showEvaluationPanel: boolean;
  transcript: TranscriptEntry[];
  counters: {
    attemptsQ: number;
    totalQueriesN: number;
    sbCount: number;
  };
  gauges: {
    eSbr: number | null;
    eArt: number | null;
    e: number | null;
    c: number | null;
    artpqS: number | null;
  };
}

export class SessionConsole {
  readonly sessionId: string;
  private readonly client: ServiceClient;
  private phase: ConsolePhase = "ready";
  private transcript: TranscriptEntry[] = [];
  private stats: LiveStats | null = null;

  constructor(client: ServiceClient, sessionId: string) {
    this.client = client;
    this.sessionId = sessionId;
  }

  /** Send a prompt; `newAttempt` mirrors the console's attempt-boundary toggle. */
  async sendPrompt(text: string, newAttempt: boolean): Promise<PromptResult> {
    if (this.phase === "accepted" || this.phase === "waiting") {
      throw new Error(`cannot prompt in phase ${this.phase}`);
    }
    this.phase = "waiting";
    let result: PromptResult;
    try {
      result = await this.client.postPrompt(this.sessionId, text, newAttempt);
    } catch (error) {
      this.phase = this.transcript.length === 0 ? "ready" : this.phaseAfterLastEntry();
      throw error;
    }
    this.transcript.push({
      prompt: text,
      newAttempt,
      status: result.status,
      response: result.text,
      latencyS: result.latency_s,
      tag: null,
    });
    this.phase = result.status === "answer" ? "answered" : "busy";
    await this.refreshStats();
    return result;
  }

  /** Tag the last resolved query's outcome; accepting ends the session. */
  async tag(tag: OutcomeTag): Promise<void> {
    if (this.phase !== "answered" && this.phase !== "busy") {
      throw new Error(`cannot tag in phase ${this.phase}`);
    }
    await this.client.tagOutcome(this.sessionId, tag);
    const last = this.transcript[this.transcript.length - 1];
    if (last) last.tag = tag;
    this.phase = tag === "accepted" ? "accepted" : "ready";
    await this.refreshStats();
  }

  async refreshStats(): Promise<LiveStats> {
    this.stats = await this.client.getStats(this.sessionId);
    return this.stats;
  }

  /** Rebuild console state from the server, e.g. after a page reload. */
  async restore(): Promise<void> {
    const { events } = await this.client.getEvents(this.sessionId);
    this.transcript = [];
    let pendingNewAttempt = false;
    for (const event of events) {
      if (event.kind === "attempt_started") {
        pendingNewAttempt = true;
      } else if (event.kind === "query_sent") {
        this.transcript.push({
          prompt: String(event.payload["prompt"] ?? ""),
          newAttempt: pendingNewAttempt,
          status: "answer",
          response: null,
          latencyS: 0,
          tag: null,
        });
        pendingNewAttempt = false;
      } else if (event.kind === "response_received") {
        const last = this.transcript[this.transcript.length - 1];
        if (last) {
          last.status = "answer";
          last.response = String(event.payload["text"] ?? "");
          last.latencyS = Number(event.payload["latency_s"] ?? 0);
        }
      } else if (event.kind === "sb_detected") {
        const last = this.transcript[this.transcript.length - 1];
        if (last) {
          last.status = "server_busy";
          last.latencyS = Number(event.payload["wait_s"] ?? 0);
        }
      } else if (event.kind === "outcome_tagged") {
        const last = this.transcript[this.transcript.length - 1];
        if (last) last.tag = event.payload["tag"] as OutcomeTag;
      }
    }
    const last = this.transcript[this.transcript.length - 1];
    if (last?.tag === "accepted") {
      this.phase = "accepted";
    } else if (last?.tag) {
      this.phase = "ready";
    } else if (last) {
      this.phase = last.status === "answer" ? "answered" : "busy";
    } else {
      this.phase = "ready";
    }
    await this.refreshStats();
  }

  private phaseAfterLastEntry(): ConsolePhase {
    const last = this.transcript[this.transcript.length - 1];
    if (!last) return "ready";
    if (last.tag === "accepted") return "accepted";
    if (last.tag) return "ready";
    return last.status === "answer" ? "answered" : "busy";
  }

  viewModel(): ConsoleViewModel {
    return {
      phase: this.phase,
      canPrompt: this.phase === "ready" || this.phase === "answered" || this.phase === "busy",
      canTag: this.phase === "answered" || this.phase === "busy",
      busyBadge: this.phase === "busy",
      showEvaluationPanel: this.phase === "accepted",
      transcript: this.transcript.map((entry) => ({ ...entry })),
      counters: {
        attemptsQ: this.stats?.attempts_q ?? 0,
        totalQueriesN: this.stats?.total_queries_n ?? 0,
        sbCount: this.stats?.sb_count ?? 0,
      },
      gauges: {
        eSbr: this.stats?.provisional.e_sbr ?? null,
        eArt: this.stats?.provisional.e_art ?? null,
        e: this.stats?.provisional.e ?? null,
        c: this.stats?.provisional.c ?? null,
        artpqS: this.stats?.artpq_s ?? null,
      },
    };
  }
}
