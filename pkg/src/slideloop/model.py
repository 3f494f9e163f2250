"""Slide document model.

A :class:`SlideDoc` is an ordered set of design elements on a fixed-size
canvas; list order is z-order, back to front. All geometry is integer EMU
(914,400 per inch, 9,525 per pixel at 96 dpi) so ingest is lossless.

Documents are value types: operations elsewhere in the package never mutate
a document they received, they build modified copies.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources

EMU_PER_INCH = 914400
EMU_PER_PIXEL_96DPI = 9525

_RGB_RE = re.compile(r"^[0-9A-F]{6}$")


def _load_resource(name: str) -> dict:
    ref = resources.files("slideloop").joinpath("schema", name)
    return json.loads(ref.read_text(encoding="utf-8"))


_REGISTRY = _load_resource("shape_registry.json")

#: Ordered auto-shape names supported by the design scope (closed set).
SHAPE_NAMES: tuple[str, ...] = tuple(s["name"] for s in _REGISTRY["shapes"])
_PRESET_BY_NAME: dict[str, str] = {s["name"]: s["preset"] for s in _REGISTRY["shapes"]}
_NAME_BY_PRESET: dict[str, str] = {}
for _s in _REGISTRY["shapes"]:
    _NAME_BY_PRESET.setdefault(_s["preset"], _s["name"])


def shape_preset(name: str) -> str:
    """OOXML preset geometry value for a registry shape name."""
    return _PRESET_BY_NAME[name]


def shape_name_for_preset(preset: str) -> str | None:
    """Registry name for an OOXML preset, or None when out of scope."""
    return _NAME_BY_PRESET.get(preset)


class Status(str, Enum):
    TENTATIVE = "TENTATIVE"
    FINAL = "FINAL"


class FillMode(str, Enum):
    SOLID = "solid"
    GRADIENT = "gradient"
    PATTERN = "pattern"
    NONE = "none"


class Alignment(str, Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"
    JUSTIFY = "justify"


@dataclass
class Color:
    rgb: str
    alpha: float = 1.0

    def __post_init__(self):
        self.rgb = self.rgb.upper()


@dataclass
class Geometry:
    """Axis-aligned placement in EMU; rotation in degrees about the center."""

    x: int
    y: int
    width: int
    height: int
    rotation: float = 0.0


@dataclass
class Fill:
    mode: FillMode
    colors: list[Color] = field(default_factory=list)
    transparency: float = 0.0

    @classmethod
    def solid(cls, rgb: str, alpha: float = 1.0) -> "Fill":
        return cls(FillMode.SOLID, [Color(rgb, alpha)])

    @classmethod
    def none(cls) -> "Fill":
        return cls(FillMode.NONE, [])


@dataclass
class TextRun:
    text: str
    font_name: str
    font_size: float
    color: Color


@dataclass
class TextFrame:
    runs: list[TextRun]
    line_spacing: float = 1.0
    alignment: Alignment = Alignment.LEFT


@dataclass
class ShapeKind:
    """Either a named auto-shape or a media placeholder (image/video).

    Media placeholders carry geometry and kind only; their payload is out of
    scope by design.
    """

    type: str  # "auto_shape" | "placeholder"
    name: str | None = None
    media: str | None = None

    @classmethod
    def auto(cls, name: str) -> "ShapeKind":
        return cls(type="auto_shape", name=name)

    @classmethod
    def placeholder(cls, media: str) -> "ShapeKind":
        return cls(type="placeholder", media=media)

    @property
    def is_media(self) -> bool:
        return self.type == "placeholder"


@dataclass
class Element:
    id: str
    kind: ShapeKind
    position: Geometry
    fill: Fill
    text: TextFrame | None = None
    status: Status = Status.FINAL


@dataclass
class SlideDoc:
    canvas_width: int
    canvas_height: int
    elements: list[Element] = field(default_factory=list)
    source_id: str = ""

    def element_ids(self) -> list[str]:
        return [e.id for e in self.elements]

    def get(self, element_id: str) -> Element | None:
        for e in self.elements:
            if e.id == element_id:
                return e
        return None

    def clone(self) -> "SlideDoc":
        return copy.deepcopy(self)


@dataclass
class Violation:
    element_id: str | None
    rule: str
    message: str


def validate(doc: SlideDoc) -> list[Violation]:
    """Check every model invariant; empty list means the document is valid."""
    out: list[Violation] = []
    if doc.canvas_width <= 0 or doc.canvas_height <= 0:
        out.append(Violation(None, "canvas_positive", "canvas dimensions must be > 0"))

    seen: dict[str, int] = {}
    for e in doc.elements:
        seen[e.id] = seen.get(e.id, 0) + 1
    for eid, count in seen.items():
        if count > 1:
            out.append(
                Violation(eid, "duplicate_id", f"id {eid!r} used by {count} elements")
            )

    for e in doc.elements:
        out.extend(_validate_element(e))
    return out


def _validate_element(e: Element) -> list[Violation]:
    out: list[Violation] = []
    k = e.kind
    if k.type == "auto_shape":
        if k.media is not None:
            out.append(Violation(e.id, "kind_variant", "auto_shape with media field"))
        if k.name not in _PRESET_BY_NAME:
            out.append(
                Violation(e.id, "unknown_shape", f"shape name {k.name!r} not in registry")
            )
    elif k.type == "placeholder":
        if k.name is not None:
            out.append(Violation(e.id, "kind_variant", "placeholder with shape name"))
        if k.media not in ("image", "video"):
            out.append(Violation(e.id, "kind_variant", f"bad media {k.media!r}"))
        if e.text is not None:
            out.append(
                Violation(e.id, "media_with_text", "media placeholders never carry text")
            )
    else:
        out.append(Violation(e.id, "kind_variant", f"unknown kind type {k.type!r}"))

    g = e.position
    if g.width < 0 or g.height < 0:
        out.append(Violation(e.id, "geometry_negative", "width/height must be >= 0"))
    for fname in ("x", "y", "width", "height"):
        if not isinstance(getattr(g, fname), int):
            out.append(
                Violation(e.id, "geometry_integer", f"position.{fname} must be integer EMU")
            )
            break

    f = e.fill
    if f.mode == FillMode.SOLID and len(f.colors) != 1:
        out.append(
            Violation(e.id, "fill_color_count", "solid fill requires exactly one color")
        )
    if f.mode == FillMode.GRADIENT and len(f.colors) < 2:
        out.append(
            Violation(e.id, "fill_color_count", "gradient fill requires at least two colors")
        )
    if not 0.0 <= f.transparency <= 1.0:
        out.append(Violation(e.id, "transparency_range", "transparency outside [0,1]"))
    for c in f.colors:
        out.extend(_validate_color(e.id, c))

    if e.text is not None:
        t = e.text
        if not t.runs:
            out.append(Violation(e.id, "text_runs_empty", "text frame has no runs"))
        if len(t.runs) > 1 and any(r.text == "" for r in t.runs):
            out.append(
                Violation(
                    e.id, "empty_run_text", "empty run text only allowed for a sole run"
                )
            )
        if t.line_spacing <= 0:
            out.append(Violation(e.id, "line_spacing_positive", "line_spacing must be > 0"))
        for r in t.runs:
            if r.font_size <= 0:
                out.append(Violation(e.id, "font_size_positive", "font_size must be > 0"))
            out.extend(_validate_color(e.id, r.color))
    return out


def _validate_color(eid: str, c: Color) -> list[Violation]:
    out = []
    if not _RGB_RE.match(c.rgb):
        out.append(Violation(eid, "color_format", f"rgb {c.rgb!r} not 6 uppercase hex digits"))
    if not 0.0 <= c.alpha <= 1.0:
        out.append(Violation(eid, "alpha_range", f"alpha {c.alpha} outside [0,1]"))
    return out


# --- structural diff -------------------------------------------------------

DOC_ID = "$doc"  # pseudo id carrying document-level differences


@dataclass
class ElementDiff:
    id: str
    change: str  # "added" | "removed" | "modified"
    fields: list[str] = field(default_factory=list)


def diff(a: SlideDoc, b: SlideDoc) -> list[ElementDiff]:
    """Per-element differences between two documents, matched by id.

    Document-level changes (canvas size, source id, relative order of shared
    elements) are reported under the pseudo id ``$doc`` so that an empty
    result means the documents are semantically equal.
    """
    out: list[ElementDiff] = []
    doc_fields: list[str] = []
    if a.canvas_width != b.canvas_width:
        doc_fields.append("canvas_width")
    if a.canvas_height != b.canvas_height:
        doc_fields.append("canvas_height")
    if a.source_id != b.source_id:
        doc_fields.append("source_id")

    a_ids = a.element_ids()
    b_ids = b.element_ids()
    b_by_id = {e.id: e for e in b.elements}
    a_by_id = {e.id: e for e in a.elements}
    shared = set(a_ids) & set(b_ids)
    if [i for i in a_ids if i in shared] != [i for i in b_ids if i in shared]:
        doc_fields.append("element_order")
    if doc_fields:
        out.append(ElementDiff(DOC_ID, "modified", doc_fields))

    for e in a.elements:
        if e.id not in b_by_id:
            out.append(ElementDiff(e.id, "removed"))
            continue
        fields = _element_field_diff(e, b_by_id[e.id])
        if fields:
            out.append(ElementDiff(e.id, "modified", fields))
    for e in b.elements:
        if e.id not in a_by_id:
            out.append(ElementDiff(e.id, "added"))
    return out


def _element_field_diff(a: Element, b: Element) -> list[str]:
    fields: list[str] = []
    for attr in ("type", "name", "media"):
        if getattr(a.kind, attr) != getattr(b.kind, attr):
            fields.append(f"kind.{attr}")
    for attr in ("x", "y", "width", "height", "rotation"):
        if getattr(a.position, attr) != getattr(b.position, attr):
            fields.append(f"position.{attr}")
    if a.fill.mode != b.fill.mode:
        fields.append("fill.mode")
    if len(a.fill.colors) != len(b.fill.colors):
        fields.append("fill.colors")
    else:
        for i, (ca, cb) in enumerate(zip(a.fill.colors, b.fill.colors)):
            if ca.rgb != cb.rgb:
                fields.append(f"fill.colors[{i}].rgb")
            if ca.alpha != cb.alpha:
                fields.append(f"fill.colors[{i}].alpha")
    if a.fill.transparency != b.fill.transparency:
        fields.append("fill.transparency")

    if (a.text is None) != (b.text is None):
        fields.append("text")
    elif a.text is not None and b.text is not None:
        if len(a.text.runs) != len(b.text.runs):
            fields.append("text.runs")
        else:
            for i, (ra, rb) in enumerate(zip(a.text.runs, b.text.runs)):
                for attr in ("text", "font_name", "font_size"):
                    if getattr(ra, attr) != getattr(rb, attr):
                        fields.append(f"text.runs[{i}].{attr}")
                if ra.color.rgb != rb.color.rgb:
                    fields.append(f"text.runs[{i}].color.rgb")
                if ra.color.alpha != rb.color.alpha:
                    fields.append(f"text.runs[{i}].color.alpha")
        if a.text.line_spacing != b.text.line_spacing:
            fields.append("text.line_spacing")
        if a.text.alignment != b.text.alignment:
            fields.append("text.alignment")
    if a.status != b.status:
        fields.append("status")
    return fields


def semantically_equal(a: SlideDoc, b: SlideDoc) -> bool:
    return not diff(a, b)


# --- status helpers --------------------------------------------------------


def with_statuses(doc: SlideDoc, tentative_ids: set[str] | frozenset[str]) -> SlideDoc:
    """Copy of ``doc`` with exactly ``tentative_ids`` marked TENTATIVE."""
    out = doc.clone()
    for e in out.elements:
        e.status = Status.TENTATIVE if e.id in tentative_ids else Status.FINAL
    return out


def clear_statuses(doc: SlideDoc) -> SlideDoc:
    return with_statuses(doc, frozenset())


def mark_all_tentative(doc: SlideDoc) -> SlideDoc:
    return with_statuses(doc, frozenset(doc.element_ids()))


def tentative_ids(doc: SlideDoc) -> set[str]:
    return {e.id for e in doc.elements if e.status == Status.TENTATIVE}


def next_element_id(doc: SlideDoc) -> str:
    """Fresh ``e{n}`` id not colliding with any existing element id."""
    top = -1
    for eid in doc.element_ids():
        m = re.fullmatch(r"e(\d+)", eid)
        if m:
            top = max(top, int(m.group(1)))
    return f"e{top + 1}"


__all__ = [
    "EMU_PER_INCH",
    "EMU_PER_PIXEL_96DPI",
    "SHAPE_NAMES",
    "Alignment",
    "Color",
    "DOC_ID",
    "Element",
    "ElementDiff",
    "Fill",
    "FillMode",
    "Geometry",
    "ShapeKind",
    "SlideDoc",
    "Status",
    "TextFrame",
    "TextRun",
    "Violation",
    "clear_statuses",
    "diff",
    "mark_all_tentative",
    "next_element_id",
    "semantically_equal",
    "shape_name_for_preset",
    "shape_preset",
    "tentative_ids",
    "validate",
    "with_statuses",
    "replace",
]
