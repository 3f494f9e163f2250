"""Deterministic slide analysis shared by the heuristic reviewer and
contributor: alignment-line detection, overlap measurement, palette and
font statistics.

All geometric tolerances are fractions of the canvas width so they scale
with the deck format.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .model import Element, FillMode, Geometry, SlideDoc

DEFAULT_FONT_SET: frozenset[str] = frozenset({"Arial", "Roboto", "Calibri"})
DEFAULT_COLOR_SET: frozenset[str] = frozenset({"FFFFFF", "000000"})

EDGE_FAMILIES = ("left", "right", "top", "bottom")


@dataclass(frozen=True)
class HeuristicConfig:
    default_fonts: frozenset[str] = DEFAULT_FONT_SET
    iou_threshold: float = 0.9
    # An edge within line_tol of a dominant line counts as on it; within
    # near_tol but not on it counts as misaligned.
    line_tol_frac: float = 0.005
    near_tol_frac: float = 0.02


def edge_value(g: Geometry, family: str) -> int:
    if family == "left":
        return g.x
    if family == "right":
        return g.x + g.width
    if family == "top":
        return g.y
    return g.y + g.height


def dominant_lines(doc: SlideDoc, family: str, tol: float) -> list[int]:
    """Edge positions shared by at least two elements within ``tol`` EMU."""
    values = [edge_value(e.position, family) for e in doc.elements]
    lines = []
    for v in values:
        if sum(1 for w in values if abs(w - v) <= tol) >= 2:
            lines.append(v)
    return sorted(set(lines))


def on_any_line(value: int, lines: list[int], tol: float) -> bool:
    return any(abs(value - line) <= tol for line in lines)


def nearest_near_miss(value: int, lines: list[int], tol: float, near: float) -> int | None:
    """Nearest line the value is close to but not on; None when aligned or far."""
    best = None
    best_dist = None
    for line in lines:
        dist = abs(value - line)
        if dist <= tol:
            return None  # already aligned to some line
    for line in lines:
        dist = abs(value - line)
        if tol < dist <= near and (best_dist is None or dist < best_dist):
            best, best_dist = line, dist
    return best


def iou(a: Geometry, b: Geometry) -> float:
    ix = max(0, min(a.x + a.width, b.x + b.width) - max(a.x, b.x))
    iy = max(0, min(a.y + a.height, b.y + b.height) - max(a.y, b.y))
    inter = ix * iy
    union = a.width * a.height + b.width * b.height - inter
    return inter / union if union > 0 else 0.0


def kind_signature(e: Element) -> tuple:
    return (e.kind.type, e.kind.name, e.kind.media)


def beyond_canvas(e: Element, doc: SlideDoc) -> bool:
    g = e.position
    return (
        g.x < 0
        or g.y < 0
        or g.x + g.width > doc.canvas_width
        or g.y + g.height > doc.canvas_height
    )


def is_black_on_white(e: Element, cfg: HeuristicConfig | None = None) -> bool:
    """Default coloring: solid white fill with black (or no) text."""
    if e.fill.mode != FillMode.SOLID or not e.fill.colors:
        return False
    if e.fill.colors[0].rgb != "FFFFFF":
        return False
    if e.text is not None and any(r.color.rgb != "000000" for r in e.text.runs):
        return False
    return True


def _element_colors(e: Element) -> list[str]:
    colors = [c.rgb for c in e.fill.colors]
    if e.text is not None:
        colors.extend(r.color.rgb for r in e.text.runs)
    return colors


def has_non_default_palette(doc: SlideDoc, exclude_id: str | None = None) -> bool:
    for e in doc.elements:
        if e.id == exclude_id:
            continue
        if any(rgb not in DEFAULT_COLOR_SET for rgb in _element_colors(e)):
            return True
    return False


def fill_palette(doc: SlideDoc, exclude_id: str | None = None) -> list[str]:
    """Non-default fill colors of the slide, most frequent first (ties by hex)."""
    counts: Counter[str] = Counter()
    for e in doc.elements:
        if e.id == exclude_id:
            continue
        for c in e.fill.colors:
            if c.rgb not in DEFAULT_COLOR_SET:
                counts[c.rgb] += 1
    return [rgb for rgb, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def dominant_font(
    doc: SlideDoc, default_fonts: frozenset[str], exclude_id: str | None = None
) -> str | None:
    """Most frequent non-default font among the slide's text runs."""
    counts: Counter[str] = Counter()
    for e in doc.elements:
        if e.id == exclude_id or e.text is None:
            continue
        for r in e.text.runs:
            if r.font_name not in default_fonts:
                counts[r.font_name] += 1
    if not counts:
        return None
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def heuristic_flags(doc: SlideDoc, cfg: HeuristicConfig | None = None) -> set[str]:
    """Element ids flagged by the deterministic reviewer rules.

    Rules, in order: (1) element extends beyond the canvas; (2) a text run
    uses a default font while some sibling uses a non-default one; (3) the
    element near-duplicates an earlier element of the same kind; (4) default
    black-on-white coloring on a slide that otherwise has a palette; (5) an
    edge sits close to a dominant alignment line without being on it.
    """
    cfg = cfg or HeuristicConfig()
    tol = cfg.line_tol_frac * doc.canvas_width
    near = cfg.near_tol_frac * doc.canvas_width
    lines = {fam: dominant_lines(doc, fam, tol) for fam in EDGE_FAMILIES}
    any_non_default_font = any(
        e.text is not None and any(r.font_name not in cfg.default_fonts for r in e.text.runs)
        for e in doc.elements
    )

    flags: set[str] = set()
    for idx, e in enumerate(doc.elements):
        # rule 1: out of canvas
        if beyond_canvas(e, doc):
            flags.add(e.id)
            continue
        # rule 2: default font among non-default siblings
        if (
            e.text is not None
            and any(r.font_name in cfg.default_fonts for r in e.text.runs)
            and _sibling_has_non_default_font(doc, e, cfg)
        ):
            flags.add(e.id)
            continue
        # rule 3: near-duplicate of an earlier element
        if _duplicates_earlier(doc, idx, cfg):
            flags.add(e.id)
            continue
        # rule 4: default coloring on a colored slide
        if is_black_on_white(e) and has_non_default_palette(doc, exclude_id=e.id):
            flags.add(e.id)
            continue
        # rule 5: misaligned against a dominant line
        for fam in EDGE_FAMILIES:
            value = edge_value(e.position, fam)
            if nearest_near_miss(value, lines[fam], tol, near) is not None:
                flags.add(e.id)
                break
    return flags


def _sibling_has_non_default_font(doc: SlideDoc, e: Element, cfg: HeuristicConfig) -> bool:
    for other in doc.elements:
        if other.id == e.id or other.text is None:
            continue
        if any(r.font_name not in cfg.default_fonts for r in other.text.runs):
            return True
    return False


def _duplicates_earlier(doc: SlideDoc, idx: int, cfg: HeuristicConfig) -> bool:
    e = doc.elements[idx]
    for other in doc.elements[:idx]:
        if kind_signature(other) == kind_signature(e) and iou(
            other.position, e.position
        ) > cfg.iou_threshold:
            return True
    return False


def near_duplicate_of_any(doc: SlideDoc, e: Element, cfg: HeuristicConfig) -> bool:
    for other in doc.elements:
        if other.id == e.id:
            continue
        if kind_signature(other) == kind_signature(e) and iou(
            other.position, e.position
        ) > cfg.iou_threshold:
            return True
    return False
