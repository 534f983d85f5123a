import { describe, expect, it } from "vitest";

import { ApiError, ServiceClient } from "../src/api.js";
import { StubService, answer } from "./stub-service.js";

describe("ServiceClient", () => {
  it("walks the documented endpoints with the documented bodies", async () => {
    const stub = new StubService({ promptScript: [answer(53.0, "some code")] });
    const client = new ServiceClient("http://localhost:8377", stub.fetch);

    const { session_id } = await client.createSession("GPT", "lstm-weather");
    await client.postPrompt(session_id, "write the model", true);
    await client.tagOutcome(session_id, "accepted");
    await client.getStats(session_id);

    expect(stub.calls.map((c) => `${c.method} ${c.path}`)).toEqual([
      "POST /sessions",
      `POST /sessions/${session_id}/prompts`,
      `POST /sessions/${session_id}/outcome`,
      `GET /sessions/${session_id}/stats`,
    ]);
    expect(stub.calls[0]?.body).toEqual({
      framework_label: "GPT",
      task_label: "lstm-weather",
    });
    expect(stub.calls[1]?.body).toEqual({ text: "write the model", new_attempt: true });
    expect(stub.calls[2]?.body).toEqual({ tag: "accepted" });
  });

  it("propagates the structured error body as ApiError", async () => {
    const stub = new StubService();
    const client = new ServiceClient("http://localhost:8377", stub.fetch);
    const failure = client.getIni("nope");
    await expect(failure).rejects.toBeInstanceOf(ApiError);
    await expect(failure).rejects.toMatchObject({ code: "incomplete_session", status: 409 });
  });

  it("encodes compare ids and plot windows in the query string", async () => {
    const stub = new StubService({
      comparison: { ranking: [], tables: {} },
      plots: { "s1?variable=temp&window=100:200": { variable: "temp" } },
    });
    const client = new ServiceClient("http://localhost:8377/", stub.fetch);
    await client.compare(["a", "b"]);
    await client.getPlot("s1", "temp", { start: 100, end: 200 });
    expect(stub.calls[0]?.path).toBe("/compare?ids=a%2Cb");
    expect(stub.calls[1]?.path).toBe("/plots/s1?variable=temp&window=100%3A200");
  });
});

describe("console round-trip ordering", () => {
  it("emits the exact mutation sequence the service turns into ordered events", async () => {
    // The service-side test suite proves this call sequence produces the
    // JSONL events (session_opened, attempt_started, query_sent,
    // response_received, outcome_tagged, ..., session_closed) in order; here
    // we pin that the console emits exactly this sequence.
    const stub = new StubService({
      promptScript: [answer(53.0, "first"), answer(3.0, "second")],
    });
    const client = new ServiceClient("http://svc", stub.fetch);
    const { session_id } = await client.createSession("GPT", "task");
    await client.postPrompt(session_id, "q1", true);
    await client.tagOutcome(session_id, "rejected_misunderstood");
    await client.postPrompt(session_id, "q2", true);
    await client.tagOutcome(session_id, "accepted");

    const mutations = stub.calls.filter((c) => c.method === "POST");
    expect(mutations.map((c) => c.path.split("/").pop())).toEqual([
      "sessions",
      "prompts",
      "outcome",
      "prompts",
      "outcome",
    ]);

    // the stub's event journal (mirroring the real service's log) is ordered
    const events = await client.getEvents(session_id);
    expect(events.events.map((e) => e.kind)).toEqual([
      "session_opened",
      "attempt_started",
      "query_sent",
      "response_received",
      "outcome_tagged",
      "attempt_started",
      "query_sent",
      "response_received",
      "outcome_tagged",
      "session_closed",
    ]);
    expect(events.events.map((e) => e.seq)).toEqual([1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
  });
});
