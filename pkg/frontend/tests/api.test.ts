import { describe, expect, it } from "vitest";

import { ApiError, SlideloopClient } from "../src/api.js";
import { fixtureDoc, view } from "./helpers.js";

function fetchStub(
  handler: (url: string, init?: RequestInit) => { status?: number; body: unknown },
): typeof fetch {
  return (async (url: RequestInfo | URL, init?: RequestInit) => {
    const { status = 200, body } = handler(String(url), init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });
  }) as typeof fetch;
}

describe("SlideloopClient", () => {
  it("posts canonical slide payloads on create", async () => {
    const doc = fixtureDoc();
    let captured: { url: string; body: unknown } | null = null;
    const client = new SlideloopClient(
      "http://svc",
      fetchStub((url, init) => {
        captured = { url, body: JSON.parse(String(init?.body)) };
        return { body: view(doc) };
      }),
    );
    const response = await client.createSession(doc);
    expect(captured!.url).toBe("http://svc/sessions");
    expect(captured!.body).toEqual({ slide: doc });
    expect(response.session_id).toBe("s1");
  });

  it("sends branch and label requests with the wire field names", async () => {
    const calls: Array<{ url: string; body: unknown }> = [];
    const client = new SlideloopClient(
      "",
      fetchStub((url, init) => {
        calls.push({ url, body: init?.body ? JSON.parse(String(init.body)) : null });
        return { body: { session_id: "s1", branches: [], errors: [], flagged: [] } };
      }),
    );
    await client.branch("s1", 2, 7);
    await client.applyLabels("s1", ["e1", "e0"]);
    expect(calls[0]).toEqual({ url: "/sessions/s1/branch", body: { n: 2, seed: 7 } });
    expect(calls[1]).toEqual({
      url: "/sessions/s1/labels",
      body: { element_ids: ["e1", "e0"] },
    });
  });

  it("surfaces service errors with their kind and status", async () => {
    const client = new SlideloopClient(
      "",
      fetchStub(() => ({
        status: 422,
        body: { error: { kind: "unknown_elements", message: "unknown element ids: ghost" } },
      })),
    );
    const error = await client.applyLabels("s1", ["ghost"]).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(422);
    expect(error.kind).toBe("unknown_elements");
  });

  it("builds the export link from the session id", () => {
    const client = new SlideloopClient("http://svc");
    expect(client.exportUrl("abc")).toBe("http://svc/sessions/abc/export.pptx");
  });
});
