// End-to-end against the live service with the toy checkpoint: marking a
// token replace removes it from the rendered output, and marker/level
// round-trips mirror the server's applied markers faithfully.

import { describe, expect, inject, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { diffTokens } from "../src/diff.js";
import {
  applyResponse,
  buildRequest,
  cycleMarker,
  newSession,
} from "../src/markers.js";

const api = () => new ApiClient(inject("baseUrl"));

const SENTENCE = ["the", "cat", "occurs", "a", "arduous", "mat", "."];

describe("service", () => {
  it("is healthy", async () => {
    const health = await api().health();
    expect(health.status).toBe("ok");
  });

  it("exposes the ban inventory for chip hints", async () => {
    const entries = await api().lexicon("occ");
    const words = entries.map((e) => e.word);
    expect(words).toContain("occurs");
  });
});

describe("simplify round trip", () => {
  it("marking a token replace yields an output lacking that token", async () => {
    const client = api();
    const lexicon = await client.lexicon("");
    const banned = new Set(lexicon.map((e) => e.word));
    let session = newSession(SENTENCE, banned, "NEWSELA", "SIMPLE");

    // strike out "occurs" explicitly: cycle until the user override is REPLACE
    // (the ban-inventory hint may have pre-set the displayed marker already)
    const idx = SENTENCE.indexOf("occurs");
    while (session.chips[idx].userSet !== "REPLACE") {
      session.chips[idx] = cycleMarker(session.chips[idx]);
    }
    expect(session.chips[idx].marker).toBe("REPLACE");

    const request = buildRequest(session);
    const response = await client.simplify(request);
    session = applyResponse(session, request, response);

    expect(session.output?.output_tokens).not.toContain("occurs");
    expect(session.history).toHaveLength(1);
    const spans = diffTokens(SENTENCE, response.output_tokens);
    expect(spans.some((s) => s.op === "delete" && s.token === "occurs")).toBe(true);
  });

  it("echoed applied_markers overwrite local chip state", async () => {
    const client = api();
    let session = newSession(SENTENCE, new Set(), "NEWSELA", "SIMPLE");
    session.chips[1] = cycleMarker(session.chips[1]); // cat -> KEEP
    const request = buildRequest(session);
    const response = await client.simplify(request);
    session = applyResponse(session, request, response);
    expect(response.applied_markers).toHaveLength(SENTENCE.length);
    expect(session.chips.map((c) => c.marker)).toEqual(response.applied_markers);
    expect(session.chips[1].marker).toBe("KEEP"); // override honored verbatim
  });

  it("level switch re-submission appends to history and stays banned-free", async () => {
    const client = api();
    const lexicon = await client.lexicon("");
    const banned = new Set(lexicon.map((e) => e.word));
    let session = newSession(SENTENCE, banned, "NEWSELA", "SIMPLE");

    const first = buildRequest(session);
    session = applyResponse(session, first, await client.simplify(first));

    session = { ...session, level: "XSIMPLE" };
    const second = buildRequest(session);
    const response = await client.simplify(second);
    session = applyResponse(session, second, response);

    expect(session.history).toHaveLength(2);
    expect(session.history[0].request.level).toBe("SIMPLE");
    expect(session.history[1].request.level).toBe("XSIMPLE");
    for (const hit of response.banned_words_hit) {
      expect(response.output_tokens).not.toContain(hit);
    }
  });

  it("history replay reproduces identical outputs", async () => {
    const client = api();
    let session = newSession(SENTENCE, new Set(), "NEWSELA", "SIMPLE");
    const request = buildRequest(session);
    const first = await client.simplify(request);
    session = applyResponse(session, request, first);
    const replay = await client.simplify(session.history[0].request);
    expect(replay.output_tokens).toEqual(first.output_tokens);
    expect(replay.template).toEqual(first.template);
  });

  it("rejects misaligned markers with a structured 4xx", async () => {
    const res = await fetch(`${inject("baseUrl")}/simplify`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ tokens: ["a", "b"], markers: ["KEEP"] }),
    });
    expect(res.status).toBe(400);
    const body = await res.json();
    expect(body.detail).toBeTruthy();
  });
});
