import type { SlideDocPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

/** Walk up from a click target to the per-element hit region: the renderer
 * wraps every slide element in a <g data-element-id=...>. */
export function elementIdAt(target: EventTarget | null, root: Element | null): string | null {
  if (!root || !(target instanceof Element)) return null;
  let node: Element | null = target;
  while (node && node !== root) {
    const id = node.getAttribute?.("data-element-id");
    if (id) return id;
    node = node.parentElement;
  }
  return null;
}

/** Hit regions must match the document one-to-one. */
export function hitRegionsMatchDoc(root: Element, doc: SlideDocPayload): boolean {
  const regionIds = Array.from(root.querySelectorAll("g[data-element-id]")).map(
    (g) => g.getAttribute("data-element-id"),
  );
  const docIds = doc.elements.map((e) => e.id);
  return (
    regionIds.length === docIds.length &&
    regionIds.every((id, index) => id === docIds[index])
  );
}

/** Draw dashed boxes over the flagged elements. Decorations live in their
 * own layer appended to the rendered SVG; the document itself is untouched. */
export function decorateFlags(
  svgRoot: SVGSVGElement,
  doc: SlideDocPayload,
  flagged: Set<string>,
): void {
  for (const old of Array.from(svgRoot.querySelectorAll(".flag-overlay"))) {
    old.remove();
  }
  const width = Number(svgRoot.getAttribute("width") ?? 0);
  if (!width || !doc.canvas_width) return;
  const scale = width / doc.canvas_width;
  for (const element of doc.elements) {
    if (!flagged.has(element.id)) continue;
    const box = document.createElementNS(SVG_NS, "rect");
    const g = element.position;
    box.setAttribute("class", "flag-overlay");
    box.setAttribute("data-flag-for", element.id);
    box.setAttribute("x", String(g.x * scale));
    box.setAttribute("y", String(g.y * scale));
    box.setAttribute("width", String(g.width * scale));
    box.setAttribute("height", String(g.height * scale));
    box.setAttribute("fill", "none");
    box.setAttribute("stroke", "#FF3B30");
    box.setAttribute("stroke-width", "2");
    box.setAttribute("stroke-dasharray", "6,4");
    box.setAttribute("pointer-events", "none");
    svgRoot.appendChild(box);
  }
}
