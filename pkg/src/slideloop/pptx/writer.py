"""Writes decks back to minimal, standards-valid ``.pptx`` archives.

The writer emits a fresh archive (content types, rels, one blank master,
layout and theme, one part per slide) rather than mutating an original
file. Media placeholders become picture shapes over a bundled 1x1 PNG;
video placeholders carry an external video relationship so the kind
survives re-ingest.
"""

from __future__ import annotations

import base64
import io
import zipfile
from xml.sax.saxutils import escape, quoteattr

from ..errors import ValidationFailure
from ..model import (
    Alignment,
    Element,
    Fill,
    FillMode,
    SlideDoc,
    TextFrame,
    shape_preset,
    validate,
)
from .deck import Deck

# 1x1 transparent PNG used as the stand-in payload for media placeholders.
PLACEHOLDER_PNG = base64.b64decode(
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR4nGNgYGBgAAAABQAB"
    "pfZFQAAAAABJRU5ErkJggg=="
)

_XML_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
_NS_A = "http://schemas.openxmlformats.org/drawingml/2006/main"
_NS_P = "http://schemas.openxmlformats.org/presentationml/2006/main"
_NS_R = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
_NS_REL = "http://schemas.openxmlformats.org/package/2006/relationships"

_ALIGN_CODES = {
    Alignment.LEFT: "l",
    Alignment.CENTER: "ctr",
    Alignment.RIGHT: "r",
    Alignment.JUSTIFY: "just",
}


def export_pptx(deck: Deck) -> bytes:
    """Serialize a deck to ``.pptx`` bytes; slides must be valid documents."""
    for i, slide in enumerate(deck.slides):
        violations = validate(slide)
        if violations:
            raise ValidationFailure(violations)

    canvas = (
        (deck.slides[0].canvas_width, deck.slides[0].canvas_height)
        if deck.slides
        else (12192000, 6858000)
    )
    has_media = any(
        e.kind.is_media for slide in deck.slides for e in slide.elements
    )

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as z:
        n = len(deck.slides)
        z.writestr("[Content_Types].xml", _content_types(n))
        z.writestr("_rels/.rels", _root_rels())
        z.writestr("docProps/core.xml", _core_props(deck.metadata.title))
        z.writestr("ppt/presentation.xml", _presentation(n, canvas))
        z.writestr("ppt/_rels/presentation.xml.rels", _presentation_rels(n))
        z.writestr("ppt/theme/theme1.xml", _THEME_XML)
        z.writestr("ppt/slideMasters/slideMaster1.xml", _MASTER_XML)
        z.writestr("ppt/slideMasters/_rels/slideMaster1.xml.rels", _MASTER_RELS)
        z.writestr("ppt/slideLayouts/slideLayout1.xml", _LAYOUT_XML)
        z.writestr("ppt/slideLayouts/_rels/slideLayout1.xml.rels", _LAYOUT_RELS)
        if has_media:
            z.writestr("ppt/media/placeholder.png", PLACEHOLDER_PNG)
        for index, slide in enumerate(deck.slides, start=1):
            xml, rels = _slide_xml(slide)
            z.writestr(f"ppt/slides/slide{index}.xml", xml)
            z.writestr(f"ppt/slides/_rels/slide{index}.xml.rels", rels)
    return buffer.getvalue()


def _content_types(slide_count: int) -> str:
    overrides = "".join(
        f'<Override PartName="/ppt/slides/slide{i}.xml" ContentType='
        f'"application/vnd.openxmlformats-officedocument.presentationml.slide+xml"/>'
        for i in range(1, slide_count + 1)
    )
    return (
        _XML_DECL
        + f'<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
        f'<Default Extension="rels" ContentType='
        f'"application/vnd.openxmlformats-package.relationships+xml"/>'
        f'<Default Extension="xml" ContentType="application/xml"/>'
        f'<Default Extension="png" ContentType="image/png"/>'
        f'<Override PartName="/ppt/presentation.xml" ContentType='
        f'"application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"/>'
        f'<Override PartName="/ppt/slideMasters/slideMaster1.xml" ContentType='
        f'"application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml"/>'
        f'<Override PartName="/ppt/slideLayouts/slideLayout1.xml" ContentType='
        f'"application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml"/>'
        f'<Override PartName="/ppt/theme/theme1.xml" ContentType='
        f'"application/vnd.openxmlformats-officedocument.theme+xml"/>'
        f'<Override PartName="/docProps/core.xml" ContentType='
        f'"application/vnd.openxmlformats-package.core-properties+xml"/>'
        f"{overrides}</Types>"
    )


def _root_rels() -> str:
    return (
        _XML_DECL + f'<Relationships xmlns="{_NS_REL}">'
        f'<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/'
        f'officeDocument/2006/relationships/officeDocument" Target="ppt/presentation.xml"/>'
        f'<Relationship Id="rId2" Type="http://schemas.openxmlformats.org/'
        f'package/2006/relationships/metadata/core-properties" Target="docProps/core.xml"/>'
        f"</Relationships>"
    )


def _core_props(title: str) -> str:
    return (
        _XML_DECL
        + '<cp:coreProperties xmlns:cp="http://schemas.openxmlformats.org/package/2006/'
        'metadata/core-properties" xmlns:dc="http://purl.org/dc/elements/1.1/">'
        f"<dc:title>{escape(title)}</dc:title>"
        "</cp:coreProperties>"
    )


def _presentation(slide_count: int, canvas: tuple[int, int]) -> str:
    slide_ids = "".join(
        f'<p:sldId id="{255 + i}" r:id="rId{1 + i}"/>' for i in range(1, slide_count + 1)
    )
    return (
        _XML_DECL
        + f'<p:presentation xmlns:a="{_NS_A}" xmlns:r="{_NS_R}" xmlns:p="{_NS_P}">'
        f'<p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst>'
        f"<p:sldIdLst>{slide_ids}</p:sldIdLst>"
        f'<p:sldSz cx="{canvas[0]}" cy="{canvas[1]}"/>'
        f'<p:notesSz cx="6858000" cy="9144000"/>'
        f"</p:presentation>"
    )


def _presentation_rels(slide_count: int) -> str:
    rels = [
        '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/'
        'officeDocument/2006/relationships/slideMaster"'
        ' Target="slideMasters/slideMaster1.xml"/>'
    ]
    for i in range(1, slide_count + 1):
        rels.append(
            f'<Relationship Id="rId{1 + i}" Type="http://schemas.openxmlformats.org/'
            f'officeDocument/2006/relationships/slide" Target="slides/slide{i}.xml"/>'
        )
    rels.append(
        f'<Relationship Id="rId{slide_count + 2}" Type="http://schemas.openxmlformats.org/'
        f'officeDocument/2006/relationships/theme" Target="theme/theme1.xml"/>'
    )
    return _XML_DECL + f'<Relationships xmlns="{_NS_REL}">' + "".join(rels) + "</Relationships>"


_EMPTY_TREE = (
    "<p:cSld><p:spTree>"
    '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
    "<p:grpSpPr/>{shapes}</p:spTree></p:cSld>"
)

_MASTER_XML = (
    _XML_DECL
    + f'<p:sldMaster xmlns:a="{_NS_A}" xmlns:r="{_NS_R}" xmlns:p="{_NS_P}">'
    + _EMPTY_TREE.format(shapes="")
    + '<p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1"'
    ' accent2="accent2" accent3="accent3" accent4="accent4" accent5="accent5"'
    ' accent6="accent6" hlink="hlink" folHlink="folHlink"/>'
    '<p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst>'
    "</p:sldMaster>"
)

_MASTER_RELS = (
    _XML_DECL
    + f'<Relationships xmlns="{_NS_REL}">'
    '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/'
    '2006/relationships/slideLayout" Target="../slideLayouts/slideLayout1.xml"/>'
    '<Relationship Id="rId2" Type="http://schemas.openxmlformats.org/officeDocument/'
    '2006/relationships/theme" Target="../theme/theme1.xml"/>'
    "</Relationships>"
)

_LAYOUT_XML = (
    _XML_DECL
    + f'<p:sldLayout xmlns:a="{_NS_A}" xmlns:r="{_NS_R}" xmlns:p="{_NS_P}" type="blank">'
    + _EMPTY_TREE.format(shapes="")
    + "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sldLayout>"
)

_LAYOUT_RELS = (
    _XML_DECL
    + f'<Relationships xmlns="{_NS_REL}">'
    '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/'
    '2006/relationships/slideMaster" Target="../slideMasters/slideMaster1.xml"/>'
    "</Relationships>"
)

_THEME_XML = (
    _XML_DECL
    + f'<a:theme xmlns:a="{_NS_A}" name="Minimal">'
    "<a:themeElements>"
    '<a:clrScheme name="Minimal">'
    '<a:dk1><a:srgbClr val="000000"/></a:dk1>'
    '<a:lt1><a:srgbClr val="FFFFFF"/></a:lt1>'
    '<a:dk2><a:srgbClr val="44546A"/></a:dk2>'
    '<a:lt2><a:srgbClr val="E7E6E6"/></a:lt2>'
    '<a:accent1><a:srgbClr val="4472C4"/></a:accent1>'
    '<a:accent2><a:srgbClr val="ED7D31"/></a:accent2>'
    '<a:accent3><a:srgbClr val="A5A5A5"/></a:accent3>'
    '<a:accent4><a:srgbClr val="FFC000"/></a:accent4>'
    '<a:accent5><a:srgbClr val="5B9BD5"/></a:accent5>'
    '<a:accent6><a:srgbClr val="70AD47"/></a:accent6>'
    '<a:hlink><a:srgbClr val="0563C1"/></a:hlink>'
    '<a:folHlink><a:srgbClr val="954F72"/></a:folHlink>'
    "</a:clrScheme>"
    '<a:fontScheme name="Minimal">'
    '<a:majorFont><a:latin typeface="Calibri Light"/><a:ea typeface=""/><a:cs typeface=""/></a:majorFont>'
    '<a:minorFont><a:latin typeface="Calibri"/><a:ea typeface=""/><a:cs typeface=""/></a:minorFont>'
    "</a:fontScheme>"
    '<a:fmtScheme name="Minimal">'
    "<a:fillStyleLst>"
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    "</a:fillStyleLst>"
    "<a:lnStyleLst>"
    '<a:ln w="6350"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
    '<a:ln w="12700"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
    '<a:ln w="19050"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
    "</a:lnStyleLst>"
    "<a:effectStyleLst>"
    "<a:effectStyle><a:effectLst/></a:effectStyle>"
    "<a:effectStyle><a:effectLst/></a:effectStyle>"
    "<a:effectStyle><a:effectLst/></a:effectStyle>"
    "</a:effectStyleLst>"
    "<a:bgFillStyleLst>"
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    "</a:bgFillStyleLst>"
    "</a:fmtScheme>"
    "</a:themeElements>"
    "</a:theme>"
)


def _slide_xml(slide: SlideDoc) -> tuple[str, str]:
    shapes = []
    media_rel_ids: list[tuple[str, str]] = []  # (rel id, kind)
    for n, element in enumerate(slide.elements, start=2):
        if element.kind.is_media:
            rid = f"rId{len(media_rel_ids) + 1}"
            media_rel_ids.append((rid, element.kind.media))
            shapes.append(_pic_xml(element, n, rid))
        else:
            shapes.append(_sp_xml(element, n))
    xml = (
        _XML_DECL
        + f'<p:sld xmlns:a="{_NS_A}" xmlns:r="{_NS_R}" xmlns:p="{_NS_P}">'
        + _EMPTY_TREE.format(shapes="".join(shapes))
        + "<p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr></p:sld>"
    )
    rels = [
        f'<Relationship Id="{rid}" Type="http://schemas.openxmlformats.org/officeDocument/'
        f'2006/relationships/image" Target="../media/placeholder.png"/>'
        for rid, _ in media_rel_ids
    ]
    for rid, kind in media_rel_ids:
        if kind == "video":
            rels.append(
                f'<Relationship Id="{rid}v" Type="http://schemas.openxmlformats.org/'
                f'officeDocument/2006/relationships/video"'
                f' Target="https://media.invalid/placeholder" TargetMode="External"/>'
            )
    rels_xml = (
        _XML_DECL + f'<Relationships xmlns="{_NS_REL}">' + "".join(rels) + "</Relationships>"
    )
    return xml, rels_xml


def _xfrm_xml(element: Element) -> str:
    g = element.position
    rot = f' rot="{round(g.rotation * 60000)}"' if g.rotation else ""
    return (
        f"<a:xfrm{rot}><a:off x=\"{g.x}\" y=\"{g.y}\"/>"
        f'<a:ext cx="{g.width}" cy="{g.height}"/></a:xfrm>'
    )


def _color_xml(rgb: str, alpha: float, transparency: float = 0.0) -> str:
    effective = alpha * (1.0 - transparency)
    inner = f'<a:alpha val="{round(effective * 100000)}"/>' if effective < 1.0 else ""
    return f'<a:srgbClr val="{rgb}">{inner}</a:srgbClr>' if inner else f'<a:srgbClr val="{rgb}"/>'


def _fill_xml(fill: Fill) -> str:
    if fill.mode == FillMode.NONE:
        return "<a:noFill/>"
    if fill.mode == FillMode.SOLID:
        return f"<a:solidFill>{_color_xml(fill.colors[0].rgb, fill.colors[0].alpha, fill.transparency)}</a:solidFill>"
    if fill.mode == FillMode.GRADIENT:
        last = len(fill.colors) - 1
        stops = "".join(
            f'<a:gs pos="{round(i * 100000 / last)}">'
            f"{_color_xml(c.rgb, c.alpha, fill.transparency)}</a:gs>"
            for i, c in enumerate(fill.colors)
        )
        return (
            f"<a:gradFill><a:gsLst>{stops}</a:gsLst>"
            f'<a:lin ang="5400000" scaled="1"/></a:gradFill>'
        )
    fg = fill.colors[0]
    bg = fill.colors[1] if len(fill.colors) > 1 else None
    bg_xml = _color_xml(bg.rgb, bg.alpha, fill.transparency) if bg else '<a:srgbClr val="FFFFFF"/>'
    return (
        f'<a:pattFill prst="ltUpDiag"><a:fgClr>'
        f"{_color_xml(fg.rgb, fg.alpha, fill.transparency)}</a:fgClr>"
        f"<a:bgClr>{bg_xml}</a:bgClr></a:pattFill>"
    )


def _sp_xml(element: Element, number: int) -> str:
    preset = shape_preset(element.kind.name)
    if element.kind.name == "line":
        # a line's color is its stroke
        color = element.fill.colors[0] if element.fill.colors else None
        fill_xml = "<a:noFill/>"
        ln_xml = (
            f'<a:ln w="19050"><a:solidFill>'
            f"{_color_xml(color.rgb, color.alpha, element.fill.transparency)}"
            f"</a:solidFill></a:ln>"
            if color
            else ""
        )
    else:
        fill_xml = _fill_xml(element.fill)
        ln_xml = ""
    tx_body = _tx_body_xml(element.text) if element.text is not None else ""
    return (
        f"<p:sp><p:nvSpPr><p:cNvPr id=\"{number}\" name={quoteattr(element.id)}/>"
        f"<p:cNvSpPr/><p:nvPr/></p:nvSpPr>"
        f"<p:spPr>{_xfrm_xml(element)}"
        f'<a:prstGeom prst="{preset}"><a:avLst/></a:prstGeom>'
        f"{fill_xml}{ln_xml}</p:spPr>{tx_body}</p:sp>"
    )


def _pic_xml(element: Element, number: int, rid: str) -> str:
    nv_pr = (
        f'<p:nvPr><a:videoFile r:link="{rid}v"/></p:nvPr>'
        if element.kind.media == "video"
        else "<p:nvPr/>"
    )
    return (
        f"<p:pic><p:nvPicPr><p:cNvPr id=\"{number}\" name={quoteattr(element.id)}/>"
        f"<p:cNvPicPr/>{nv_pr}</p:nvPicPr>"
        f'<p:blipFill><a:blip r:embed="{rid}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>'
        f"<p:spPr>{_xfrm_xml(element)}"
        f'<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>'
    )


def _tx_body_xml(frame: TextFrame) -> str:
    paragraphs = _paragraphs_from_runs(frame)
    algn = _ALIGN_CODES[frame.alignment]
    spacing = (
        f'<a:lnSpc><a:spcPct val="{round(frame.line_spacing * 100000)}"/></a:lnSpc>'
    )
    p_pr = f'<a:pPr algn="{algn}">{spacing}</a:pPr>'
    parts = []
    for para in paragraphs:
        runs = "".join(
            f"<a:r><a:rPr lang=\"en-US\" sz=\"{round(run.font_size * 100)}\">"
            f"<a:solidFill>{_color_xml(run.color.rgb, run.color.alpha)}</a:solidFill>"
            f"<a:latin typeface={quoteattr(run.font_name)}/></a:rPr>"
            f"<a:t>{escape(text)}</a:t></a:r>"
            for text, run in para
        )
        parts.append(f"<a:p>{p_pr}{runs}</a:p>")
    return "<p:txBody><a:bodyPr/><a:lstStyle/>" + "".join(parts) + "</p:txBody>"


def _paragraphs_from_runs(frame: TextFrame):
    paragraphs: list[list] = [[]]
    for run in frame.runs:
        pieces = run.text.split("\n")
        for i, piece in enumerate(pieces):
            if i > 0:
                paragraphs.append([])
            if piece != "" or (len(pieces) == 1 and piece == ""):
                paragraphs[-1].append((piece, run))
    return paragraphs
