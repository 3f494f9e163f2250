"""Reads ``.pptx`` archives (zip-of-XML) into decks of slide documents.

Only the supported design scope is extracted: registry auto-shapes and
connectors, media placeholders (geometry and kind, payload dropped), text
with font attributes, solid/gradient/pattern fills. Theme-indexed colors are
resolved to literal RGB. Grouped shapes are flattened to absolute
coordinates. Tables, charts and other graphic frames are skipped and
reported; a malformed slide part skips that slide, never the whole deck.
"""

from __future__ import annotations

import colorsys
import io
import posixpath
import re
import zipfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from ..errors import IngestError
from ..model import (
    Alignment,
    Color,
    Element,
    Fill,
    FillMode,
    Geometry,
    ShapeKind,
    SlideDoc,
    TextFrame,
    TextRun,
    shape_name_for_preset,
)
from .deck import Deck, IngestReport

NS_TRANSITIONAL = {
    "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
    "p": "http://schemas.openxmlformats.org/presentationml/2006/main",
    "r": "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
}
NS_STRICT = {
    "a": "http://purl.oclc.org/ooxml/drawingml/main",
    "p": "http://purl.oclc.org/ooxml/presentationml/main",
    "r": "http://purl.oclc.org/ooxml/officeDocument/relationships",
}
NS_REL = "http://schemas.openxmlformats.org/package/2006/relationships"
NS_DC = "http://purl.org/dc/elements/1.1/"

DEFAULT_CANVAS = (12192000, 6858000)
DEFAULT_FONT = "Calibri"
DEFAULT_FONT_SIZE = 18.0

_PRESET_COLORS = {
    "black": "000000", "white": "FFFFFF", "red": "FF0000", "green": "008000",
    "blue": "0000FF", "yellow": "FFFF00", "gray": "808080", "grey": "808080",
    "orange": "FFA500", "purple": "800080", "cyan": "00FFFF", "magenta": "FF00FF",
}

# scheme color names used in shapes map onto theme slots via the standard map
_SCHEME_ALIASES = {"tx1": "dk1", "bg1": "lt1", "tx2": "dk2", "bg2": "lt2"}


def _ns_for(root: ET.Element) -> dict:
    return NS_STRICT if root.tag.startswith("{http://purl.oclc.org/") else NS_TRANSITIONAL


@dataclass(frozen=True)
class _Transform:
    """Affine group transform: absolute = origin + (value - child_origin) * scale."""

    ox: float = 0.0
    oy: float = 0.0
    sx: float = 1.0
    sy: float = 1.0
    cx: float = 0.0
    cy: float = 0.0

    def point(self, x: float, y: float) -> tuple[int, int]:
        return (
            round(self.ox + (x - self.cx) * self.sx),
            round(self.oy + (y - self.cy) * self.sy),
        )

    def extent(self, w: float, h: float) -> tuple[int, int]:
        return round(w * self.sx), round(h * self.sy)

    def child(self, off, ext, ch_off, ch_ext) -> "_Transform":
        ax, ay = self.ox + (off[0] - self.cx) * self.sx, self.oy + (off[1] - self.cy) * self.sy
        sx = self.sx * (ext[0] / ch_ext[0]) if ch_ext[0] else self.sx
        sy = self.sy * (ext[1] / ch_ext[1]) if ch_ext[1] else self.sy
        return _Transform(ax, ay, sx, sy, ch_off[0], ch_off[1])


IDENTITY = _Transform()


def load_pptx(data: bytes) -> tuple[Deck, IngestReport]:
    """Parse a ``.pptx`` archive; never fails on a single bad slide."""
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile:
        raise IngestError("input is not a zip archive", kind="not_an_archive")

    names = set(archive.namelist())
    if "ppt/presentation.xml" not in names:
        raise IngestError("missing presentation part", kind="missing_presentation_part")

    try:
        pres = ET.fromstring(archive.read("ppt/presentation.xml"))
    except ET.ParseError as exc:
        raise IngestError(f"presentation part is not valid XML: {exc}",
                          kind="missing_presentation_part")
    ns = _ns_for(pres)

    canvas = DEFAULT_CANVAS
    sld_sz = pres.find("p:sldSz", ns)
    if sld_sz is not None:
        canvas = (int(sld_sz.get("cx", canvas[0])), int(sld_sz.get("cy", canvas[1])))

    slide_parts = _slide_parts(archive, pres, ns, names)
    theme = _load_theme(archive, names)
    title = _load_title(archive, names)

    report = IngestReport()
    slides: list[SlideDoc] = []
    for index, part in enumerate(slide_parts):
        try:
            root = ET.fromstring(archive.read(part))
        except (ET.ParseError, KeyError) as exc:
            report.add_skip(index, "other", f"slide part unreadable: {exc}")
            continue
        slide = _parse_slide(root, canvas, theme, index, part, report)
        slides.append(slide)
    deck = Deck.of(slides, title=title)
    report.parsed_elements = sum(len(s.elements) for s in deck.slides)
    return deck, report


def _slide_parts(archive, pres, ns, names) -> list[str]:
    rel_targets: dict[str, str] = {}
    rels_name = "ppt/_rels/presentation.xml.rels"
    if rels_name in names:
        try:
            rels = ET.fromstring(archive.read(rels_name))
            for rel in rels.iter(f"{{{NS_REL}}}Relationship"):
                target = rel.get("Target", "")
                rel_targets[rel.get("Id", "")] = posixpath.normpath(
                    posixpath.join("ppt", target)
                )
        except ET.ParseError:
            pass
    parts: list[str] = []
    id_list = pres.find("p:sldIdLst", ns)
    if id_list is not None:
        for sld_id in id_list:
            rid = sld_id.get(f"{{{ns['r']}}}id")
            target = rel_targets.get(rid)
            if target and target in names:
                parts.append(target)
    if not parts:  # fall back to naming convention
        numbered = []
        for name in names:
            m = re.fullmatch(r"ppt/slides/slide(\d+)\.xml", name)
            if m:
                numbered.append((int(m.group(1)), name))
        parts = [name for _, name in sorted(numbered)]
    return parts


def _load_theme(archive, names) -> dict[str, str]:
    theme_names = sorted(n for n in names if re.fullmatch(r"ppt/theme/theme\d+\.xml", n))
    if not theme_names:
        return {}
    try:
        root = ET.fromstring(archive.read(theme_names[0]))
    except ET.ParseError:
        return {}
    ns = _ns_for(root)
    scheme = root.find(f".//a:clrScheme", ns)
    out: dict[str, str] = {}
    if scheme is None:
        return out
    for slot in scheme:
        slot_name = slot.tag.split("}")[1]
        srgb = slot.find("a:srgbClr", ns)
        sys = slot.find("a:sysClr", ns)
        if srgb is not None:
            out[slot_name] = srgb.get("val", "000000").upper()
        elif sys is not None:
            out[slot_name] = sys.get("lastClr", "000000").upper()
    return out


def _load_title(archive, names) -> str:
    if "docProps/core.xml" not in names:
        return ""
    try:
        root = ET.fromstring(archive.read("docProps/core.xml"))
    except ET.ParseError:
        return ""
    node = root.find(f"{{{NS_DC}}}title")
    return node.text or "" if node is not None else ""


def _parse_slide(root, canvas, theme, index, part_name, report) -> SlideDoc:
    ns = _ns_for(root)
    doc = SlideDoc(
        canvas_width=canvas[0],
        canvas_height=canvas[1],
        elements=[],
        source_id=part_name,
    )
    tree = root.find("p:cSld/p:spTree", ns)
    if tree is None:
        return doc
    _walk_tree(tree, IDENTITY, doc, theme, ns, index, report)
    return doc


def _walk_tree(tree, transform, doc, theme, ns, slide_index, report) -> None:
    for child in tree:
        tag = child.tag.split("}")[1]
        try:
            if tag in ("sp", "cxnSp"):
                _parse_shape(child, tag, transform, doc, theme, ns, slide_index, report)
            elif tag == "pic":
                _parse_pic(child, transform, doc, theme, ns, slide_index, report)
            elif tag == "graphicFrame":
                _report_graphic_frame(child, ns, slide_index, report)
            elif tag == "grpSp":
                _parse_group(child, transform, doc, theme, ns, slide_index, report)
        except Exception as exc:  # one bad shape never kills the slide
            report.add_skip(slide_index, "other", f"{tag}: {exc}")


def _parse_group(node, transform, doc, theme, ns, slide_index, report) -> None:
    xfrm = node.find("p:grpSpPr/a:xfrm", ns)
    child_transform = transform
    if xfrm is not None:
        off = _pair(xfrm.find("a:off", ns), "x", "y")
        ext = _pair(xfrm.find("a:ext", ns), "cx", "cy")
        ch_off = _pair(xfrm.find("a:chOff", ns), "x", "y") or off
        ch_ext = _pair(xfrm.find("a:chExt", ns), "cx", "cy") or ext
        if off and ext and ch_off and ch_ext:
            child_transform = transform.child(off, ext, ch_off, ch_ext)
    _walk_tree(node, child_transform, doc, theme, ns, slide_index, report)


def _pair(node, a, b):
    if node is None:
        return None
    return (int(node.get(a, 0)), int(node.get(b, 0)))


def _parse_shape(node, tag, transform, doc, theme, ns, slide_index, report) -> None:
    sp_pr = node.find("p:spPr", ns)
    if sp_pr is None:
        report.add_skip(slide_index, "other", f"{tag} without properties")
        return
    geometry = _parse_xfrm(sp_pr, transform, ns)
    if geometry is None:
        # inherited (layout placeholder) geometry is out of scope
        report.add_skip(slide_index, "other", f"{tag} with inherited geometry")
        return
    prst_geom = sp_pr.find("a:prstGeom", ns)
    if prst_geom is None:
        if sp_pr.find("a:custGeom", ns) is not None:
            report.add_skip(slide_index, "unsupported_shape", "custom geometry")
            return
        preset = "rect"  # text boxes may omit the geometry entirely
    else:
        preset = prst_geom.get("prst", "rect")
    name = shape_name_for_preset(preset)
    if name is None:
        report.add_skip(slide_index, "unsupported_shape", f"preset {preset!r}")
        return

    fill = _parse_fill(sp_pr, theme, ns)
    if name == "line" and fill.mode == FillMode.NONE:
        stroke = _line_stroke_color(sp_pr, theme, ns)
        if stroke is not None:
            fill = Fill(FillMode.SOLID, [stroke])

    text = None
    tx_body = node.find("p:txBody", ns)
    if tx_body is not None and tag == "sp":
        text = _parse_text(tx_body, theme, ns)

    doc.elements.append(
        Element(
            id=f"e{len(doc.elements)}",
            kind=ShapeKind.auto(name),
            position=geometry,
            fill=fill,
            text=text,
        )
    )


def _parse_pic(node, transform, doc, theme, ns, slide_index, report) -> None:
    sp_pr = node.find("p:spPr", ns)
    geometry = _parse_xfrm(sp_pr, transform, ns) if sp_pr is not None else None
    if geometry is None:
        report.add_skip(slide_index, "other", "pic with inherited geometry")
        return
    media = "video" if node.find("p:nvPicPr/p:nvPr/a:videoFile", ns) is not None else "image"
    report.add_skip(slide_index, "media_payload_dropped", f"{media} payload")
    doc.elements.append(
        Element(
            id=f"e{len(doc.elements)}",
            kind=ShapeKind.placeholder(media),
            position=geometry,
            fill=Fill.none(),
        )
    )


def _report_graphic_frame(node, ns, slide_index, report) -> None:
    data = node.find("a:graphic/a:graphicData", ns)
    uri = data.get("uri", "") if data is not None else ""
    if uri.endswith("/table"):
        report.add_skip(slide_index, "table", uri)
    elif uri.endswith("/chart"):
        report.add_skip(slide_index, "chart", uri)
    else:
        report.add_skip(slide_index, "other", f"graphic frame {uri!r}")


def _parse_xfrm(sp_pr, transform, ns) -> Geometry | None:
    xfrm = sp_pr.find("a:xfrm", ns)
    if xfrm is None:
        return None
    off = _pair(xfrm.find("a:off", ns), "x", "y")
    ext = _pair(xfrm.find("a:ext", ns), "cx", "cy")
    if off is None or ext is None:
        return None
    x, y = transform.point(off[0], off[1])
    w, h = transform.extent(ext[0], ext[1])
    rotation = int(xfrm.get("rot", 0)) / 60000
    return Geometry(x=x, y=y, width=w, height=h, rotation=rotation)


def _parse_fill(sp_pr, theme, ns) -> Fill:
    solid = sp_pr.find("a:solidFill", ns)
    if solid is not None:
        color = _parse_color(solid, theme, ns)
        return Fill(FillMode.SOLID, [color or Color("000000")])
    grad = sp_pr.find("a:gradFill", ns)
    if grad is not None:
        stops = []
        gs_list = grad.find("a:gsLst", ns)
        if gs_list is not None:
            ordered = sorted(gs_list, key=lambda gs: int(gs.get("pos", 0)))
            for gs in ordered:
                color = _parse_color(gs, theme, ns)
                if color is not None:
                    stops.append(color)
        if len(stops) >= 2:
            return Fill(FillMode.GRADIENT, stops)
        return Fill(FillMode.SOLID, [stops[0] if stops else Color("FFFFFF")])
    patt = sp_pr.find("a:pattFill", ns)
    if patt is not None:
        fg = _parse_color(patt.find("a:fgClr", ns), theme, ns) or Color("000000")
        bg = _parse_color(patt.find("a:bgClr", ns), theme, ns) or Color("FFFFFF")
        return Fill(FillMode.PATTERN, [fg, bg])
    return Fill.none()


def _line_stroke_color(sp_pr, theme, ns) -> Color | None:
    ln = sp_pr.find("a:ln", ns)
    if ln is None:
        return None
    solid = ln.find("a:solidFill", ns)
    if solid is None:
        return None
    return _parse_color(solid, theme, ns)


def _parse_color(container, theme, ns) -> Color | None:
    """Resolve the first color child (srgb/scheme/sys/prst) to literal RGB,
    applying alpha/shade/tint/lum transforms."""
    if container is None:
        return None
    node = None
    for kind in ("srgbClr", "schemeClr", "sysClr", "prstClr"):
        node = container.find(f"a:{kind}", ns)
        if node is not None:
            break
    if node is None:
        return None
    tag = node.tag.split("}")[1]
    if tag == "srgbClr":
        rgb = node.get("val", "000000").upper()
    elif tag == "schemeClr":
        slot = node.get("val", "dk1")
        slot = _SCHEME_ALIASES.get(slot, slot)
        rgb = theme.get(slot, "000000")
    elif tag == "sysClr":
        rgb = node.get("lastClr", "000000").upper()
    else:
        rgb = _PRESET_COLORS.get(node.get("val", "black"), "000000")

    alpha = 1.0
    r, g, b = (int(rgb[i : i + 2], 16) for i in (0, 2, 4))
    for child in node:
        op = child.tag.split("}")[1]
        val = int(child.get("val", 0)) / 100000
        if op == "alpha":
            alpha = min(1.0, max(0.0, val))
        elif op == "shade":
            r, g, b = (round(c * val) for c in (r, g, b))
        elif op == "tint":
            r, g, b = (round(c * val + 255 * (1 - val)) for c in (r, g, b))
        elif op in ("lumMod", "lumOff"):
            h, l, s = colorsys.rgb_to_hls(r / 255, g / 255, b / 255)
            l = l * val if op == "lumMod" else min(1.0, max(0.0, l + val))
            fr, fg_, fb = colorsys.hls_to_rgb(h, l, s)
            r, g, b = round(fr * 255), round(fg_ * 255), round(fb * 255)
    r, g, b = (min(255, max(0, c)) for c in (r, g, b))
    return Color(f"{r:02X}{g:02X}{b:02X}", alpha)


def _parse_text(tx_body, theme, ns) -> TextFrame:
    alignment = Alignment.LEFT
    line_spacing = 1.0
    first_para = True
    runs: list[TextRun] = []
    pending = ""

    for para in tx_body.findall("a:p", ns):
        if not first_para:
            if runs:
                runs[-1].text += "\n"
            else:
                pending += "\n"
        first_para = False
        p_pr = para.find("a:pPr", ns)
        if p_pr is not None and len(runs) == 0 and pending == "":
            algn = p_pr.get("algn")
            mapping = {"l": Alignment.LEFT, "ctr": Alignment.CENTER,
                       "r": Alignment.RIGHT, "just": Alignment.JUSTIFY}
            if algn in mapping:
                alignment = mapping[algn]
            spc = p_pr.find("a:lnSpc/a:spcPct", ns)
            if spc is not None:
                line_spacing = int(spc.get("val", 100000)) / 100000
        for item in para:
            tag = item.tag.split("}")[1]
            if tag == "r":
                run = _parse_run(item, theme, ns)
                if pending:
                    run.text = pending + run.text
                    pending = ""
                runs.append(run)
            elif tag == "br":
                if runs:
                    runs[-1].text += "\n"
                else:
                    pending += "\n"
    if pending and not runs:
        runs.append(TextRun(pending, DEFAULT_FONT, DEFAULT_FONT_SIZE, Color("000000")))
    if not runs:
        runs.append(TextRun("", DEFAULT_FONT, DEFAULT_FONT_SIZE, Color("000000")))
    return TextFrame(runs=runs, line_spacing=line_spacing, alignment=alignment)


def _parse_run(node, theme, ns) -> TextRun:
    t = node.find("a:t", ns)
    text = t.text or "" if t is not None else ""
    font = DEFAULT_FONT
    size = DEFAULT_FONT_SIZE
    color = Color("000000")
    r_pr = node.find("a:rPr", ns)
    if r_pr is not None:
        if r_pr.get("sz"):
            size = int(r_pr.get("sz")) / 100
        latin = r_pr.find("a:latin", ns)
        if latin is not None and latin.get("typeface"):
            font = latin.get("typeface")
        solid = r_pr.find("a:solidFill", ns)
        parsed = _parse_color(solid, theme, ns)
        if parsed is not None:
            color = parsed
    return TextRun(text=text, font_name=font, font_size=size, color=color)
