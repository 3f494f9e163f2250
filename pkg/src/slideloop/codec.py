"""Canonical JSON codec for slide documents.

Serialization is deterministic: compact separators, key order fixed by the
versioned schema resource, and defaults omitted. Parsing is strict by
default (canonical key order, no unknown keys); ``tolerant=True`` accepts
reordered keys, trailing commas and unknown keys so that model-produced
output can be ingested.
"""

from __future__ import annotations

import json
from importlib import resources

from .errors import ParseError, SchemaError, ScopeError, ValidationFailure
from .model import (
    Alignment,
    Color,
    Element,
    Fill,
    FillMode,
    Geometry,
    ShapeKind,
    SlideDoc,
    Status,
    TextFrame,
    TextRun,
    validate,
)
from .model import _PRESET_BY_NAME  # registry membership check

SCHEMA = json.loads(
    resources.files("slideloop").joinpath("schema", "slide_schema_v1.json").read_text("utf-8")
)
SCHEMA_ID = SCHEMA["schema"]
_ORDER = SCHEMA["key_order"]

#: Proxy-token budget matching the model serving limit this format targets.
TOKEN_BUDGET = 2048


def estimate_token_length(text: str) -> int:
    """Deterministic proxy token count: ceil(utf-8 bytes / 4).

    This is a budget gate, not a tokenizer; real token counts vary by model.
    """
    n = len(text.encode("utf-8"))
    return (n + 3) // 4


# --- serialization ---------------------------------------------------------


def color_payload(c: Color) -> dict:
    out = {"rgb": c.rgb}
    if c.alpha != 1.0:
        out["alpha"] = c.alpha
    return out


def geometry_payload(g: Geometry) -> dict:
    out = {"x": g.x, "y": g.y, "width": g.width, "height": g.height}
    if g.rotation != 0:
        out["rotation"] = g.rotation
    return out


def fill_payload(f: Fill) -> dict:
    out = {"mode": f.mode.value, "colors": [color_payload(c) for c in f.colors]}
    if f.transparency != 0.0:
        out["transparency"] = f.transparency
    return out


def text_payload(t: TextFrame) -> dict:
    out: dict = {
        "runs": [
            {
                "text": r.text,
                "font_name": r.font_name,
                "font_size": r.font_size,
                "color": color_payload(r.color),
            }
            for r in t.runs
        ]
    }
    if t.line_spacing != 1.0:
        out["line_spacing"] = t.line_spacing
    if t.alignment != Alignment.LEFT:
        out["alignment"] = t.alignment.value
    return out


def kind_payload(k: ShapeKind) -> dict:
    if k.type == "auto_shape":
        return {"type": "auto_shape", "name": k.name}
    return {"type": "placeholder", "media": k.media}


def element_payload(e: Element, explicit_status: bool) -> dict:
    out = {
        "id": e.id,
        "kind": kind_payload(e.kind),
        "position": geometry_payload(e.position),
        "fill": fill_payload(e.fill),
    }
    if e.text is not None:
        out["text"] = text_payload(e.text)
    if e.status == Status.TENTATIVE:
        out["status"] = Status.TENTATIVE.value
    elif explicit_status:
        out["status"] = Status.FINAL.value
    return out


def doc_payload(doc: SlideDoc) -> dict:
    # FINAL becomes explicit as soon as any element is TENTATIVE, so the
    # labeled wire form always shows a status for every element.
    explicit = any(e.status == Status.TENTATIVE for e in doc.elements)
    return {
        "canvas_width": doc.canvas_width,
        "canvas_height": doc.canvas_height,
        "source_id": doc.source_id,
        "elements": [element_payload(e, explicit) for e in doc.elements],
    }


def to_json(doc: SlideDoc) -> str:
    """Serialize to the canonical wire form; rejects invalid documents."""
    violations = validate(doc)
    if violations:
        raise ValidationFailure(violations)
    return json.dumps(doc_payload(doc), separators=(",", ":"), ensure_ascii=False)


# --- parsing ---------------------------------------------------------------


class _Pairs(list):
    """Ordered key/value pairs of one JSON object, kept for strict checks."""


def _loads(text: str):
    try:
        return json.loads(text, object_pairs_hook=_Pairs)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise ParseError(f"malformed JSON at byte {offset}: {e.msg}", byte_offset=offset)


def _strip_trailing_commas(text: str) -> str:
    out: list[str] = []
    in_str = esc = False
    for ch in text:
        if in_str:
            out.append(ch)
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
            out.append(ch)
        elif ch in "}]":
            j = len(out) - 1
            while j >= 0 and out[j] in " \t\r\n":
                j -= 1
            if j >= 0 and out[j] == ",":
                del out[j]
            out.append(ch)
        else:
            out.append(ch)
    return "".join(out)


def _as_mapping(value, path: str, order_key: str, tolerant: bool) -> dict:
    """Turn a parsed JSON object into a plain dict, enforcing canonical key
    order and rejecting unknown keys in strict mode."""
    if isinstance(value, _Pairs):
        pairs = list(value)
    elif isinstance(value, dict):
        pairs = list(value.items())
    else:
        raise SchemaError(f"expected object, got {type(value).__name__}", path or "$")
    if tolerant:
        known = set(_ORDER[order_key])
        return {k: v for k, v in pairs if k in known}

    expected = _ORDER[order_key]
    cursor = 0
    out: dict = {}
    for key, val in pairs:
        if key in out:
            raise SchemaError(f"duplicate key {key!r}", path or "$")
        try:
            idx = expected.index(key)
        except ValueError:
            raise SchemaError(f"unknown key {key!r}", path or "$")
        if idx < cursor:
            raise SchemaError(f"key {key!r} out of canonical order", path or "$")
        cursor = idx
        out[key] = val
    return out


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise SchemaError(f"missing required key {key!r}", path or "$")
    return data[key]


def _int_field(value, path: str, tolerant: bool) -> int:
    if isinstance(value, bool):
        raise SchemaError("expected integer", path)
    if isinstance(value, int):
        return value
    if tolerant and isinstance(value, float) and value.is_integer():
        return int(value)
    raise SchemaError("expected integer EMU value", path)


def _num_field(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected number", path)
    return float(value)


def _str_field(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError("expected string", path)
    return value


def _decode_color(value, path: str, tolerant: bool) -> Color:
    data = _as_mapping(value, path, "color", tolerant)
    rgb = _str_field(_require(data, "rgb", path), f"{path}.rgb")
    if not tolerant and rgb != rgb.upper():
        raise SchemaError(f"rgb {rgb!r} must be uppercase hex", f"{path}.rgb")
    alpha = _num_field(data.get("alpha", 1.0), f"{path}.alpha")
    return Color(rgb, alpha)


def _decode_geometry(value, path: str, tolerant: bool) -> Geometry:
    data = _as_mapping(value, path, "position", tolerant)
    return Geometry(
        x=_int_field(_require(data, "x", path), f"{path}.x", tolerant),
        y=_int_field(_require(data, "y", path), f"{path}.y", tolerant),
        width=_int_field(_require(data, "width", path), f"{path}.width", tolerant),
        height=_int_field(_require(data, "height", path), f"{path}.height", tolerant),
        rotation=_num_field(data.get("rotation", 0.0), f"{path}.rotation"),
    )


def _decode_fill(value, path: str, tolerant: bool) -> Fill:
    data = _as_mapping(value, path, "fill", tolerant)
    mode_s = _str_field(_require(data, "mode", path), f"{path}.mode")
    try:
        mode = FillMode(mode_s)
    except ValueError:
        raise SchemaError(f"unknown fill mode {mode_s!r}", f"{path}.mode")
    colors_v = _require(data, "colors", path)
    if not isinstance(colors_v, list) or isinstance(colors_v, _Pairs):
        raise SchemaError("expected array", f"{path}.colors")
    colors = [
        _decode_color(c, f"{path}.colors[{i}]", tolerant) for i, c in enumerate(colors_v)
    ]
    transparency = _num_field(data.get("transparency", 0.0), f"{path}.transparency")
    return Fill(mode, colors, transparency)


def _decode_text(value, path: str, tolerant: bool) -> TextFrame:
    data = _as_mapping(value, path, "text", tolerant)
    runs_v = _require(data, "runs", path)
    if not isinstance(runs_v, list) or isinstance(runs_v, _Pairs):
        raise SchemaError("expected array", f"{path}.runs")
    runs = []
    for i, rv in enumerate(runs_v):
        rpath = f"{path}.runs[{i}]"
        rdata = _as_mapping(rv, rpath, "run", tolerant)
        runs.append(
            TextRun(
                text=_str_field(_require(rdata, "text", rpath), f"{rpath}.text"),
                font_name=_str_field(
                    _require(rdata, "font_name", rpath), f"{rpath}.font_name"
                ),
                font_size=_num_field(
                    _require(rdata, "font_size", rpath), f"{rpath}.font_size"
                ),
                color=_decode_color(_require(rdata, "color", rpath), f"{rpath}.color", tolerant),
            )
        )
    align_s = data.get("alignment", Alignment.LEFT.value)
    try:
        alignment = Alignment(_str_field(align_s, f"{path}.alignment"))
    except ValueError:
        raise SchemaError(f"unknown alignment {align_s!r}", f"{path}.alignment")
    return TextFrame(
        runs=runs,
        line_spacing=_num_field(data.get("line_spacing", 1.0), f"{path}.line_spacing"),
        alignment=alignment,
    )


def _decode_kind(value, path: str, element_label: str, tolerant: bool) -> ShapeKind:
    if isinstance(value, (_Pairs, dict)):
        probe = dict(value if isinstance(value, dict) else list(value))
    else:
        raise SchemaError("expected object", path)
    ktype = probe.get("type")
    if ktype == "auto_shape":
        data = _as_mapping(value, path, "kind_auto_shape", tolerant)
        name = _str_field(_require(data, "name", path), f"{path}.name")
        if name not in _PRESET_BY_NAME:
            raise ScopeError(
                f"shape name {name!r} is outside the supported registry"
                f" (element {element_label})",
                f"{path}.name",
            )
        return ShapeKind.auto(name)
    if ktype == "placeholder":
        data = _as_mapping(value, path, "kind_placeholder", tolerant)
        media = _str_field(_require(data, "media", path), f"{path}.media")
        if media not in ("image", "video"):
            raise SchemaError(f"unknown media {media!r}", f"{path}.media")
        return ShapeKind.placeholder(media)
    raise SchemaError(f"unknown kind type {ktype!r}", f"{path}.type")


def _decode_element(value, path: str, tolerant: bool) -> Element:
    data = _as_mapping(value, path, "element", tolerant)
    eid = _str_field(_require(data, "id", path), f"{path}.id")
    kind = _decode_kind(_require(data, "kind", path), f"{path}.kind", eid, tolerant)
    position = _decode_geometry(_require(data, "position", path), f"{path}.position", tolerant)
    fill = _decode_fill(_require(data, "fill", path), f"{path}.fill", tolerant)
    text = None
    if data.get("text") is not None:
        text = _decode_text(data["text"], f"{path}.text", tolerant)
    status = Status.FINAL
    if "status" in data:
        sval = _str_field(data["status"], f"{path}.status")
        try:
            status = Status(sval)
        except ValueError:
            raise SchemaError(f"unknown status {sval!r}", f"{path}.status")
    return Element(id=eid, kind=kind, position=position, fill=fill, text=text, status=status)


def doc_from_payload(value, tolerant: bool = False) -> SlideDoc:
    data = _as_mapping(value, "", "document", tolerant)
    elements_v = _require(data, "elements", "")
    if not isinstance(elements_v, list) or isinstance(elements_v, _Pairs):
        raise SchemaError("expected array", "elements")
    doc = SlideDoc(
        canvas_width=_int_field(_require(data, "canvas_width", ""), "canvas_width", tolerant),
        canvas_height=_int_field(
            _require(data, "canvas_height", ""), "canvas_height", tolerant
        ),
        elements=[
            _decode_element(ev, f"elements[{i}]", tolerant)
            for i, ev in enumerate(elements_v)
        ],
        source_id=_str_field(data.get("source_id", ""), "source_id"),
    )
    violations = validate(doc)
    if violations:
        raise ValidationFailure(violations)
    return doc


# Payload-fragment decoders, used for snapshots in perturbation logs and for
# request bodies that arrive pre-parsed as plain dicts.


def geometry_from_payload(data) -> Geometry:
    return _decode_geometry(data, "position", tolerant=True)


def fill_from_payload(data) -> Fill:
    return _decode_fill(data, "fill", tolerant=True)


def text_from_payload(data) -> TextFrame:
    return _decode_text(data, "text", tolerant=True)


def color_from_payload(data) -> Color:
    return _decode_color(data, "color", tolerant=True)


def element_from_payload(data) -> Element:
    return _decode_element(data, "element", tolerant=True)


def from_json(text: str, tolerant: bool = False) -> SlideDoc:
    """Parse canonical JSON into a document.

    Raises :class:`ParseError` (with byte offset) for malformed JSON,
    :class:`SchemaError`/:class:`ScopeError` with a field path for schema
    violations, and :class:`ValidationFailure` when the decoded document
    breaks a model invariant.
    """
    if tolerant:
        text = _strip_trailing_commas(text)
    return doc_from_payload(_loads(text), tolerant=tolerant)


__all__ = [
    "SCHEMA",
    "SCHEMA_ID",
    "TOKEN_BUDGET",
    "color_payload",
    "doc_from_payload",
    "doc_payload",
    "element_payload",
    "estimate_token_length",
    "fill_payload",
    "from_json",
    "geometry_payload",
    "kind_payload",
    "text_payload",
    "to_json",
]
