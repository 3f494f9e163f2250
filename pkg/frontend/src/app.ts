import { ApiError, SlideloopClient } from "./api.js";
import { SessionStore, ViewState } from "./state.js";
import { decorateFlags, elementIdAt } from "./overlay.js";
import type { SlideDocPayload } from "./types.js";

// The human plays the reviewer here: compare branch candidates, pick one,
// click elements that still need work, apply. Every document state shown is
// a server response; the client never edits documents, so there is nothing
// to diverge. One mutation runs at a time (controls disabled while busy);
// a conflict answer refetches server truth.

export class StudioApp {
  readonly store: SessionStore;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: SlideloopClient,
    store?: SessionStore,
  ) {
    this.store = store ?? new SessionStore();
    this.store.subscribe((state) => this.render(state));
    this.render(this.store.get());
  }

  async createFrom(slide: SlideDocPayload): Promise<void> {
    await this.run(async () => {
      const view = await this.client.createSession(slide);
      this.store.showServerDoc(view.doc, view.svg, view.session_id);
      await this.refreshHistory();
    });
  }

  async load(sessionId: string): Promise<void> {
    await this.run(async () => {
      const view = await this.client.getSlide(sessionId);
      this.store.showServerDoc(view.doc, view.svg, sessionId);
      await this.refreshHistory();
    });
  }

  async branch(n = 2, seed = 0): Promise<void> {
    const sessionId = this.requireSession();
    await this.run(async () => {
      const response = await this.client.branch(sessionId, n, seed);
      this.store.patch({ branches: response.branches, error: null });
      await this.refreshHistory();
    });
  }

  async selectBranch(branchId: string): Promise<void> {
    const sessionId = this.requireSession();
    await this.run(async () => {
      const view = await this.client.select(sessionId, branchId);
      this.store.showServerDoc(view.doc, view.svg);
      this.store.patch({ branches: [] });
      await this.refreshHistory();
    });
  }

  /** Post the flagged set; a zero-flag apply is a no-op with no request. */
  async applyFlags(): Promise<void> {
    const sessionId = this.requireSession();
    const flagged = Array.from(this.store.get().flagged).sort();
    if (flagged.length === 0) return;
    await this.run(async () => {
      const view = await this.client.applyLabels(sessionId, flagged);
      this.store.showServerDoc(view.doc, view.svg);
      await this.refreshHistory();
    });
  }

  async autoReview(): Promise<void> {
    const sessionId = this.requireSession();
    await this.run(async () => {
      const response = await this.client.review(sessionId);
      this.store.setFlags(response.flagged);
      await this.refreshHistory();
    });
  }

  toggleFlag(elementId: string): void {
    if (this.store.get().busy) return;
    this.store.toggleFlag(elementId);
  }

  private requireSession(): string {
    const sessionId = this.store.get().sessionId;
    if (!sessionId) throw new Error("no active session");
    return sessionId;
  }

  private async refreshHistory(): Promise<void> {
    const sessionId = this.store.get().sessionId;
    if (!sessionId) return;
    const trace = await this.client.trace(sessionId);
    this.store.patch({ historyLength: trace.history.length });
  }

  private async run(action: () => Promise<void>): Promise<void> {
    if (this.store.get().busy) return;
    this.store.patch({ busy: true });
    try {
      await action();
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // someone else mutated the session; server truth wins
        const sessionId = this.store.get().sessionId;
        if (sessionId) {
          const view = await this.client.getSlide(sessionId);
          this.store.showServerDoc(view.doc, view.svg);
        }
        this.store.patch({ error: "session was busy; state refreshed" });
      } else {
        this.store.patch({ error: error instanceof Error ? error.message : String(error) });
      }
    } finally {
      this.store.patch({ busy: false });
    }
  }

  // --- rendering -----------------------------------------------------------

  private render(state: ViewState): void {
    this.root.innerHTML = `
      <div class="toolbar">
        <button data-action="branch" ${state.busy || !state.sessionId ? "disabled" : ""}>Branch ×2</button>
        <button data-action="review" ${state.busy || !state.sessionId ? "disabled" : ""}>Auto-review</button>
        <button data-action="apply" ${state.busy || !state.sessionId || state.flagged.size === 0 ? "disabled" : ""}>
          Apply ${state.flagged.size ? `(${state.flagged.size})` : ""}
        </button>
        <a data-role="export" href="${state.sessionId ? this.client.exportUrl(state.sessionId) : "#"}">Export .pptx</a>
        <span data-role="history">history: ${state.historyLength}</span>
      </div>
      ${state.error ? `<div class="error-banner" data-role="error">${escapeHtml(state.error)} <button data-action="dismiss">dismiss</button></div>` : ""}
      <div class="branches" data-role="branches"></div>
      <div class="stage" data-role="stage"></div>
    `;

    const stage = this.root.querySelector<HTMLElement>('[data-role="stage"]')!;
    if (state.svg) {
      stage.innerHTML = state.svg;
      const svgRoot = stage.querySelector("svg");
      if (svgRoot && state.doc) {
        decorateFlags(svgRoot as SVGSVGElement, state.doc, state.flagged);
        svgRoot.addEventListener("click", (event) => {
          const id = elementIdAt(event.target, svgRoot);
          if (id) this.toggleFlag(id);
        });
      }
    }

    const branches = this.root.querySelector<HTMLElement>('[data-role="branches"]')!;
    for (const candidate of state.branches) {
      const card = document.createElement("button");
      card.className = "branch-card";
      card.setAttribute("data-branch-id", candidate.branch_id);
      card.disabled = state.busy;
      card.innerHTML = `<span class="branch-label">${candidate.branch_id}</span>${candidate.svg}`;
      card.addEventListener("click", () => void this.selectBranch(candidate.branch_id));
      branches.appendChild(card);
    }

    this.root
      .querySelector('[data-action="branch"]')
      ?.addEventListener("click", () => void this.branch(2));
    this.root
      .querySelector('[data-action="review"]')
      ?.addEventListener("click", () => void this.autoReview());
    this.root
      .querySelector('[data-action="apply"]')
      ?.addEventListener("click", () => void this.applyFlags());
    this.root
      .querySelector('[data-action="dismiss"]')
      ?.addEventListener("click", () => this.store.patch({ error: null }));
  }
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function mountApp(root: HTMLElement, baseUrl = ""): StudioApp {
  return new StudioApp(root, new SlideloopClient(baseUrl));
}

// browser entry point: mount when the shell page is present
if (typeof document !== "undefined") {
  const host = document.getElementById("app");
  if (host) {
    const app = mountApp(host);
    (window as unknown as { studio: StudioApp }).studio = app;
  }
}
