import type { SlideDocPayload, SlideView } from "../src/types.js";

export function fixtureDoc(): SlideDocPayload {
  return {
    canvas_width: 12192000,
    canvas_height: 6858000,
    source_id: "tests/fixture",
    elements: [
      {
        id: "e0",
        kind: { type: "auto_shape", name: "rectangle" },
        position: { x: 0, y: 0, width: 12192000, height: 900000 },
        fill: { mode: "solid", colors: [{ rgb: "1F3864" }] },
      },
      {
        id: "e1",
        kind: { type: "auto_shape", name: "rounded_rectangle" },
        position: { x: 1000000, y: 1400000, width: 6500000, height: 1200000 },
        fill: { mode: "solid", colors: [{ rgb: "4472C4" }] },
        text: {
          runs: [
            { text: "hello", font_name: "Georgia", font_size: 16, color: { rgb: "1A1A1A" } },
          ],
        },
      },
    ],
  };
}

export function fakeSvg(doc: SlideDocPayload, marker = "base"): string {
  const groups = doc.elements
    .map(
      (e) =>
        `<g data-element-id="${e.id}" data-kind="${e.kind.name ?? e.kind.media}" data-status="FINAL"><rect/></g>`,
    )
    .join("");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="1280" height="720" data-marker="${marker}"><rect width="1280" height="720" fill="#FFFFFF"/>${groups}</svg>`;
}

export function view(doc: SlideDocPayload, sessionId = "s1", marker = "base"): SlideView {
  return { session_id: sessionId, doc, svg: fakeSvg(doc, marker), flagged: [] };
}

export async function until(
  condition: () => boolean,
  timeoutMs = 10000,
  stepMs = 15,
): Promise<void> {
  const start = Date.now();
  while (!condition()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error("condition not met in time");
    }
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
}
