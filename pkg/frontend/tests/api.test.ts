// Thin-client contract: every number the UI shows is a payload field, every
// request body is the caller's object unchanged, and HTTP failures map to
// typed errors carrying the server's code.

import { describe, expect, it } from "vitest";
import { ApiError, ExplorerApi } from "../src/api.js";
import type { FetchLike } from "../src/api.js";

type Seen = { url: string; method: string; body: unknown };

function canned(status: number, payload: unknown, seen: Seen[]): FetchLike {
  return async (input, init) => {
    seen.push({
      url: String(input),
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "content-type": "application/json" },
    });
  };
}

describe("error mapping", () => {
  it("maps a 409 body onto ApiError", async () => {
    const api = new ExplorerApi(
      "/api",
      canned(409, { code: "SessionNotReady", message: "stage training" }, []),
    );
    const err = await api.ranking("s1").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("SessionNotReady");
    expect(err.message).toBe("stage training");
  });

  it("maps 404 and 422 the same way", async () => {
    for (const [status, code] of [
      [404, "SessionNotFound"],
      [422, "NoFlipWithinBudgetError"],
    ] as const) {
      const api = new ExplorerApi("/api", canned(status, { code, message: "x" }, []));
      const err = await api.status("s1").catch((e) => e);
      expect(err.status).toBe(status);
      expect(err.code).toBe(code);
    }
  });

  it("falls back to HttpError when the failure body is not json", async () => {
    const fetchFn: FetchLike = async () =>
      new Response("<html>bad gateway</html>", { status: 502 });
    const api = new ExplorerApi("/api", fetchFn);
    const err = await api.projections("s1").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("HttpError");
    expect(err.status).toBe(502);
  });
});

describe("request shapes", () => {
  it("encodes neighbor queries in the url", async () => {
    const seen: Seen[] = [];
    const api = new ExplorerApi("/api", canned(200, { space: "raw", neighbors: [] }, seen));
    await api.neighbors("s1", 7, "attr:saliency", 5);
    expect(seen[0].url).toBe("/api/sessions/s1/neighbors?idx=7&space=attr%3Asaliency&k=5");
    expect(seen[0].method).toBe("GET");
  });

  it("passes a whatif body through unchanged", async () => {
    const seen: Seen[] = [];
    const api = new ExplorerApi("/api", canned(200, {}, seen));
    const body = {
      base: [0.5, -0.25, 1.0],
      edits: [{ kind: "region" as const, a: 0, b: 2, op: "inverse" as const }],
    };
    await api.whatif("s1", body);
    expect(seen[0].method).toBe("POST");
    expect(seen[0].url).toBe("/api/sessions/s1/whatif");
    expect(seen[0].body).toEqual(body);
  });

  it("posts session configs verbatim", async () => {
    const seen: Seen[] = [];
    const api = new ExplorerApi("/api", canned(201, { id: "s2", state: "pending" }, seen));
    const cfg = { dataset: { name: "synth-bumps" }, model: { epochs: 2 } };
    const doc = await api.createSession(cfg);
    expect(seen[0].body).toEqual(cfg);
    expect(doc.id).toBe("s2");
  });

  it("returns parsed payloads untouched", async () => {
    const payload = { state: "done", stage: "ready", reason: null, stages_done: ["train"] };
    const api = new ExplorerApi("/api", canned(200, payload, []));
    const doc = await api.status("s1");
    expect(doc).toEqual(payload);
  });
});
