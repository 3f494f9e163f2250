import { beforeEach, describe, expect, it } from "vitest";

import { StudioApp } from "../src/app.js";
import { SlideloopClient } from "../src/api.js";
import type { BranchResponse, SlideView, TraceResponse } from "../src/types.js";
import { fakeSvg, fixtureDoc, until, view } from "./helpers.js";

/** Scripted fake service: canned responses plus a call journal. */
class FakeService {
  calls: string[] = [];
  doc = fixtureDoc();
  historyLength = 1;
  failNext: { status: number; kind: string } | null = null;

  client(): SlideloopClient {
    return new SlideloopClient("", (async (url: RequestInfo | URL, init?: RequestInit) => {
      const path = String(url);
      this.calls.push(`${init?.method ?? "GET"} ${path}`);
      if (this.failNext) {
        const { status, kind } = this.failNext;
        this.failNext = null;
        return json({ error: { kind, message: kind } }, status);
      }
      if (path.endsWith("/sessions") && init?.method === "POST") {
        return json(view(this.doc, "s1", "created"));
      }
      if (path.endsWith("/slide")) {
        return json(view(this.doc, "s1", "live"));
      }
      if (path.endsWith("/branch")) {
        const body: BranchResponse = {
          session_id: "s1",
          branches: [
            { branch_id: "b0", doc: this.doc, svg: fakeSvg(this.doc, "b0") },
            { branch_id: "b1", doc: this.doc, svg: fakeSvg(this.doc, "b1") },
          ],
          errors: [],
        };
        this.historyLength += 1;
        return json(body);
      }
      if (path.endsWith("/select")) {
        this.historyLength += 1;
        return json(view(this.doc, "s1", "selected"));
      }
      if (path.endsWith("/labels")) {
        this.historyLength += 1;
        return json(view(this.doc, "s1", "revised"));
      }
      if (path.endsWith("/review")) {
        this.historyLength += 1;
        return json({ session_id: "s1", flagged: ["e1"] });
      }
      if (path.endsWith("/trace")) {
        const body: TraceResponse = {
          session_id: "s1",
          parent: this.doc,
          current: this.doc,
          history: Array.from({ length: this.historyLength }, (_, i) => ({
            event: i === 0 ? "created" : "action",
          })),
        };
        return json(body);
      }
      return json({ error: { kind: "unknown", message: path } }, 404);
    }) as typeof fetch);
  }
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("StudioApp", () => {
  let root: HTMLElement;
  let service: FakeService;
  let app: StudioApp;

  beforeEach(() => {
    document.body.innerHTML = '<div id="host"></div>';
    root = document.getElementById("host")!;
    service = new FakeService();
    app = new StudioApp(root, service.client());
  });

  it("loads a session and shows server truth", async () => {
    await app.createFrom(service.doc);
    expect(app.store.get().sessionId).toBe("s1");
    expect(root.querySelector("svg")?.getAttribute("data-marker")).toBe("created");
    expect(root.querySelector('[data-role="history"]')?.textContent).toContain("history: 1");
  });

  it("branch then pick swaps in the selected candidate", async () => {
    await app.createFrom(service.doc);
    root.querySelector<HTMLButtonElement>('[data-action="branch"]')!.click();
    await until(
      () => !app.store.get().busy && root.querySelectorAll(".branch-card").length === 2,
    );
    const right = root.querySelector<HTMLButtonElement>('[data-branch-id="b1"]')!;
    right.click();
    await until(() => root.querySelector("svg")?.getAttribute("data-marker") === "selected");
    expect(app.store.get().branches).toEqual([]); // thumbnails replaced
    expect(service.calls).toContain("POST /sessions/s1/select");
  });

  it("re-branching replaces thumbnails and history grows", async () => {
    await app.createFrom(service.doc);
    await app.branch(2);
    const before = app.store.get().historyLength;
    await app.branch(2);
    expect(root.querySelectorAll(".branch-card").length).toBe(2);
    expect(app.store.get().historyLength).toBe(before + 1);
  });

  it("clicking an element toggles its flag and apply posts exactly those ids", async () => {
    await app.createFrom(service.doc);
    const region = root.querySelector('g[data-element-id="e1"] rect')!;
    region.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await until(() => app.store.get().flagged.has("e1"));
    expect(root.querySelectorAll(".flag-overlay").length).toBe(1);
    root.querySelector<HTMLButtonElement>('[data-action="apply"]')!.click();
    await until(() => service.calls.some((c) => c === "POST /sessions/s1/labels"));
    await until(() => !app.store.get().busy);
    expect(app.store.get().flagged.size).toBe(0); // server truth swapped in
  });

  it("apply with zero flags issues no mutation", async () => {
    await app.createFrom(service.doc);
    const before = service.calls.length;
    await app.applyFlags();
    expect(service.calls.length).toBe(before);
  });

  it("auto-review pre-highlights returned ids without mutating the doc", async () => {
    await app.createFrom(service.doc);
    const doc = app.store.get().doc;
    await app.autoReview();
    expect(app.store.get().flagged).toEqual(new Set(["e1"]));
    expect(app.store.get().doc).toEqual(doc);
  });

  it("shows an inline error banner on failures, parent slide still shown", async () => {
    await app.createFrom(service.doc);
    service.failNext = { status: 502, kind: "backend_error" };
    await app.branch(2);
    expect(root.querySelector('[data-role="error"]')?.textContent).toContain("backend_error");
    expect(root.querySelector("svg")?.getAttribute("data-marker")).toBe("created");
    expect(app.store.get().doc).toEqual(service.doc);
    // dismiss works
    root.querySelector<HTMLButtonElement>('[data-action="dismiss"]')!.click();
    expect(root.querySelector('[data-role="error"]')).toBeNull();
  });

  it("conflict responses trigger a state refetch", async () => {
    await app.createFrom(service.doc);
    service.failNext = { status: 409, kind: "session_conflict" };
    await app.branch(2);
    expect(service.calls.filter((c) => c.endsWith("/slide")).length).toBeGreaterThan(0);
    expect(root.querySelector("svg")?.getAttribute("data-marker")).toBe("live");
  });

  it("never mutates the document client-side", async () => {
    await app.createFrom(service.doc);
    const snapshot = JSON.stringify(app.store.get().doc);
    app.toggleFlag("e1");
    app.toggleFlag("e0");
    expect(JSON.stringify(app.store.get().doc)).toBe(snapshot);
  });
});
