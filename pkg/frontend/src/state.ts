import type { BranchView, SlideDocPayload } from "./types.js";

// Session view state. Documents and SVG are server truth, swapped in whole;
// the flagged set is UI state that only ever turns into a /labels request.

export interface ViewState {
  sessionId: string | null;
  doc: SlideDocPayload | null;
  svg: string;
  branches: BranchView[];
  flagged: Set<string>;
  historyLength: number;
  busy: boolean;
  error: string | null;
}

export type Listener = (state: ViewState) => void;

export class SessionStore {
  private state: ViewState = {
    sessionId: null,
    doc: null,
    svg: "",
    branches: [],
    flagged: new Set(),
    historyLength: 0,
    busy: false,
    error: null,
  };

  private listeners: Listener[] = [];

  get(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  patch(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Swap in a server response as the new truth; stale flags are dropped. */
  showServerDoc(doc: SlideDocPayload, svg: string, sessionId?: string): void {
    this.patch({
      sessionId: sessionId ?? this.state.sessionId,
      doc,
      svg,
      flagged: new Set(),
      error: null,
    });
  }

  toggleFlag(elementId: string): void {
    if (!this.state.doc?.elements.some((e) => e.id === elementId)) return;
    const flagged = new Set(this.state.flagged);
    if (flagged.has(elementId)) {
      flagged.delete(elementId);
    } else {
      flagged.add(elementId);
    }
    this.patch({ flagged });
  }

  setFlags(elementIds: string[]): void {
    const known = new Set(this.state.doc?.elements.map((e) => e.id) ?? []);
    this.patch({ flagged: new Set(elementIds.filter((id) => known.has(id))) });
  }
}
