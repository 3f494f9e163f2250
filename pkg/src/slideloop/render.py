"""SVG rendering of slide documents.

Output structure is fixed: an optional ``<defs>`` block, one background
rect, then exactly one ``<g data-element-id=...>`` per element in z-order,
then one dashed overlay rect per TENTATIVE element when highlighting is on.
The ``<g>`` wrappers double as hit regions for the browser UI.

Rendering is preview-quality on purpose: text wraps with an average-glyph
width approximation, exotic shapes degrade to simpler geometry, gradients
collapse to two stops. Identical inputs produce byte-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .model import (
    Alignment,
    Color,
    Element,
    EMU_PER_INCH,
    Fill,
    FillMode,
    SlideDoc,
    Status,
)

AVG_GLYPH_WIDTH = 0.6  # fraction of font size, for wrap estimation
LINE_HEIGHT = 1.2  # fraction of font size before line_spacing


@dataclass(frozen=True)
class RenderOptions:
    pixels_per_inch: int = 96
    highlight_tentative: bool = False
    background: Color = field(default_factory=lambda: Color("FFFFFF"))

    def __post_init__(self):
        if self.pixels_per_inch <= 0:
            raise ValueError("pixels_per_inch must be > 0")


def _num(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def render_svg(doc: SlideDoc, options: RenderOptions | None = None) -> str:
    options = options or RenderOptions()
    scale = options.pixels_per_inch / EMU_PER_INCH
    width = doc.canvas_width * scale
    height = doc.canvas_height * scale

    defs: list[str] = []
    body: list[str] = []
    body.append(
        f'<rect x="0" y="0" width="{_num(width)}" height="{_num(height)}"'
        f' fill="#{options.background.rgb}"/>'
    )
    for e in doc.elements:
        body.append(_render_element(e, scale, defs))
    if options.highlight_tentative:
        for e in doc.elements:
            if e.status == Status.TENTATIVE:
                g = e.position
                body.append(
                    f'<rect class="tentative-overlay" x="{_num(g.x * scale)}"'
                    f' y="{_num(g.y * scale)}" width="{_num(g.width * scale)}"'
                    f' height="{_num(g.height * scale)}" fill="none"'
                    f' stroke="#FF3B30" stroke-width="2" stroke-dasharray="6,4"/>'
                )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}"'
        f' height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">'
    ]
    if defs:
        parts.append("<defs>" + "".join(defs) + "</defs>")
    parts.extend(body)
    parts.append("</svg>")
    return "".join(parts)


def _render_element(e: Element, scale: float, defs: list[str]) -> str:
    g = e.position
    x, y = g.x * scale, g.y * scale
    w, h = g.width * scale, g.height * scale
    transform = ""
    if g.rotation:
        cx, cy = x + w / 2, y + h / 2
        transform = f' transform="rotate({_num(g.rotation)} {_num(cx)} {_num(cy)})"'
    inner: list[str] = []

    if e.kind.is_media:
        inner.append(
            f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" height="{_num(h)}"'
            f' fill="#ECECEC" stroke="#9A9A9A" stroke-width="1"/>'
        )
        inner.append(
            f'<line x1="{_num(x)}" y1="{_num(y)}" x2="{_num(x + w)}" y2="{_num(y + h)}"'
            f' stroke="#9A9A9A" stroke-width="1"/>'
        )
        inner.append(
            f'<line x1="{_num(x + w)}" y1="{_num(y)}" x2="{_num(x)}" y2="{_num(y + h)}"'
            f' stroke="#9A9A9A" stroke-width="1"/>'
        )
    else:
        fill_attr = _fill_attr(e.id, e.fill, defs)
        inner.append(_shape_node(e.kind.name, x, y, w, h, fill_attr, e.fill))
        if e.text is not None:
            inner.extend(_text_nodes(e, x, y, w, scale))

    return (
        f'<g data-element-id="{escape(e.id, {chr(34): "&quot;"})}"'
        f' data-kind="{e.kind.name or e.kind.media}"'
        f' data-status="{e.status.value}"{transform}>' + "".join(inner) + "</g>"
    )


def _effective_alpha(fill: Fill) -> float:
    alpha = fill.colors[0].alpha if fill.colors else 1.0
    return alpha * (1.0 - fill.transparency)


def _fill_attr(eid: str, fill: Fill, defs: list[str]) -> str:
    if fill.mode == FillMode.NONE or not fill.colors:
        return 'fill="none" stroke="#B0B0B0" stroke-width="1"'
    if fill.mode == FillMode.SOLID:
        attr = f'fill="#{fill.colors[0].rgb}"'
    elif fill.mode == FillMode.GRADIENT:
        first, last = fill.colors[0], fill.colors[-1]
        defs.append(
            f'<linearGradient id="grad-{eid}" x1="0" y1="0" x2="1" y2="1">'
            f'<stop offset="0" stop-color="#{first.rgb}"/>'
            f'<stop offset="1" stop-color="#{last.rgb}"/>'
            f"</linearGradient>"
        )
        attr = f'fill="url(#grad-{eid})"'
    else:  # pattern -> hatch
        fg = fill.colors[0].rgb
        bg = fill.colors[1].rgb if len(fill.colors) > 1 else "FFFFFF"
        defs.append(
            f'<pattern id="pat-{eid}" width="8" height="8"'
            f' patternUnits="userSpaceOnUse">'
            f'<rect width="8" height="8" fill="#{bg}"/>'
            f'<path d="M0 8L8 0" stroke="#{fg}" stroke-width="1.5"/>'
            f"</pattern>"
        )
        attr = f'fill="url(#pat-{eid})"'
    eff = _effective_alpha(fill)
    if eff < 1.0:
        attr += f' fill-opacity="{_num(eff)}"'
    return attr


def _shape_node(name: str, x, y, w, h, fill_attr: str, fill: Fill) -> str:
    if name == "line":
        color = fill.colors[0].rgb if fill.colors else "000000"
        return (
            f'<line x1="{_num(x)}" y1="{_num(y)}" x2="{_num(x + w)}" y2="{_num(y + h)}"'
            f' stroke="#{color}" stroke-width="2"/>'
        )
    if name in ("oval", "circle"):
        return (
            f'<ellipse cx="{_num(x + w / 2)}" cy="{_num(y + h / 2)}"'
            f' rx="{_num(w / 2)}" ry="{_num(h / 2)}" {fill_attr}/>'
        )
    if name == "rounded_rectangle":
        r = min(w, h) * 0.12
        return (
            f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" height="{_num(h)}"'
            f' rx="{_num(r)}" {fill_attr}/>'
        )
    points = _polygon_points(name, x, y, w, h)
    if points is not None:
        joined = " ".join(f"{_num(px)},{_num(py)}" for px, py in points)
        return f'<polygon points="{joined}" {fill_attr}/>'
    if name == "donut":
        return (
            f'<path d="M{_num(x)} {_num(y + h / 2)}'
            f'A{_num(w / 2)} {_num(h / 2)} 0 1 0 {_num(x + w)} {_num(y + h / 2)}'
            f'A{_num(w / 2)} {_num(h / 2)} 0 1 0 {_num(x)} {_num(y + h / 2)}'
            f'M{_num(x + w * 0.25)} {_num(y + h / 2)}'
            f'A{_num(w / 4)} {_num(h / 4)} 0 1 1 {_num(x + w * 0.75)} {_num(y + h / 2)}'
            f'A{_num(w / 4)} {_num(h / 4)} 0 1 1 {_num(x + w * 0.25)} {_num(y + h / 2)}Z"'
            f' fill-rule="evenodd" {fill_attr}/>'
        )
    # remaining registry shapes degrade to their bounding rectangle
    return (
        f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" height="{_num(h)}"'
        f" {fill_attr}/>"
    )


def _polygon_points(name: str, x, y, w, h):
    cx, cy = x + w / 2, y + h / 2
    if name == "triangle":
        return [(cx, y), (x + w, y + h), (x, y + h)]
    if name == "right_triangle":
        return [(x, y), (x, y + h), (x + w, y + h)]
    if name == "diamond":
        return [(cx, y), (x + w, cy), (cx, y + h), (x, cy)]
    if name == "parallelogram":
        k = w * 0.25
        return [(x + k, y), (x + w, y), (x + w - k, y + h), (x, y + h)]
    if name == "trapezoid":
        k = w * 0.25
        return [(x + k, y), (x + w - k, y), (x + w, y + h), (x, y + h)]
    if name == "chevron":
        k = w * 0.35
        return [(x, y), (x + w - k, y), (x + w, cy), (x + w - k, y + h), (x, y + h), (x + k, cy)]
    if name == "arrow":
        k, t = w * 0.35, h * 0.25
        return [
            (x, y + t), (x + w - k, y + t), (x + w - k, y), (x + w, cy),
            (x + w - k, y + h), (x + w - k, y + h - t), (x, y + h - t),
        ]
    if name == "left_arrow":
        k, t = w * 0.35, h * 0.25
        return [
            (x + w, y + t), (x + k, y + t), (x + k, y), (x, cy),
            (x + k, y + h), (x + k, y + h - t), (x + w, y + h - t),
        ]
    if name == "up_arrow":
        k, t = h * 0.35, w * 0.25
        return [
            (x + t, y + h), (x + t, y + k), (x, y + k), (cx, y),
            (x + w, y + k), (x + w - t, y + k), (x + w - t, y + h),
        ]
    if name == "down_arrow":
        k, t = h * 0.35, w * 0.25
        return [
            (x + t, y), (x + t, y + h - k), (x, y + h - k), (cx, y + h),
            (x + w, y + h - k), (x + w - t, y + h - k), (x + w - t, y),
        ]
    sides = {
        "pentagon": 5, "hexagon": 6, "heptagon": 7, "octagon": 8,
        "decagon": 10, "dodecagon": 12,
    }.get(name)
    if sides:
        return _regular_polygon(cx, cy, w / 2, h / 2, sides)
    points = {"star_4": 4, "star_5": 5, "star_6": 6}.get(name)
    if points:
        return _star(cx, cy, w / 2, h / 2, points)
    return None


def _regular_polygon(cx, cy, rx, ry, sides):
    return [
        (
            cx + rx * math.sin(2 * math.pi * i / sides),
            cy - ry * math.cos(2 * math.pi * i / sides),
        )
        for i in range(sides)
    ]


def _star(cx, cy, rx, ry, spikes):
    out = []
    for i in range(spikes * 2):
        f = 1.0 if i % 2 == 0 else 0.45
        angle = math.pi * i / spikes
        out.append((cx + rx * f * math.sin(angle), cy - ry * f * math.cos(angle)))
    return out


def _text_nodes(e: Element, x: float, y: float, w: float, scale: float) -> list[str]:
    ppi_scale = scale * EMU_PER_INCH / 72  # points -> px under the same dpi
    frame = e.text
    lines = _wrap_runs(frame.runs, w, ppi_scale)
    max_size = max((r.font_size for r in frame.runs), default=12.0) * ppi_scale
    line_height = max_size * LINE_HEIGHT * frame.line_spacing
    anchor, tx = {
        Alignment.LEFT: ("start", x),
        Alignment.JUSTIFY: ("start", x),
        Alignment.CENTER: ("middle", x + w / 2),
        Alignment.RIGHT: ("end", x + w),
    }[frame.alignment]

    nodes = []
    for i, line in enumerate(lines):
        baseline = y + i * line_height + max_size * 0.9
        spans = "".join(
            f'<tspan font-family="{escape(run.font_name, {chr(34): "&quot;"})}"'
            f' font-size="{_num(run.font_size * ppi_scale)}" fill="#{run.color.rgb}"'
            + (f' fill-opacity="{_num(run.color.alpha)}"' if run.color.alpha < 1 else "")
            + f">{escape(chunk)}</tspan>"
            for chunk, run in line
        )
        nodes.append(
            f'<text x="{_num(tx)}" y="{_num(baseline)}" text-anchor="{anchor}">{spans}</text>'
        )
    return nodes


def _wrap_runs(runs, frame_width_px: float, ppi_scale: float):
    """Greedy word wrap over the concatenated runs, average-glyph-width
    based; returns lines as lists of (text, run) chunks."""
    lines: list[list] = [[]]
    used = 0.0
    for run in runs:
        char_w = run.font_size * ppi_scale * AVG_GLYPH_WIDTH
        pieces = run.text.split("\n")
        for pi, piece in enumerate(pieces):
            if pi > 0:
                lines.append([])
                used = 0.0
            chunk = ""
            for word in piece.split(" "):
                candidate = (chunk + " " + word) if chunk else word
                if used + len(candidate) * char_w > frame_width_px and chunk:
                    lines[-1].append((chunk, run))
                    lines.append([])
                    used = 0.0
                    chunk = word
                else:
                    chunk = candidate
            if chunk or not piece:
                lines[-1].append((chunk, run))
                used += len(chunk) * char_w
    if not runs:
        return []
    filled = [line for line in lines if line]
    return filled if filled else [[("", runs[0])]]


__all__ = ["RenderOptions", "render_svg"]
