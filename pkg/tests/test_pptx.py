import io
import zipfile

import pytest

from slideloop.codec import to_json
from slideloop.errors import IngestError
from slideloop.model import (
    Color,
    Element,
    Fill,
    FillMode,
    Geometry,
    ShapeKind,
    SlideDoc,
    validate,
)
from slideloop.pptx import (
    Deck,
    deck_from_json,
    deck_to_json,
    export_pptx,
    load_pptx,
)
from slideloop.samples import sample_deck

from conftest import random_doc

P_NS = 'xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main"'


def _handmade_pptx(slide_bodies: list[str], theme: str | None = None) -> bytes:
    """Archive assembled by hand, to exercise ingest against XML our own
    writer never produces (charts, groups, theme colors)."""
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as z:
        slide_count = len(slide_bodies)
        overrides = "".join(
            f'<Override PartName="/ppt/slides/slide{i}.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slide+xml"/>'
            for i in range(1, slide_count + 1)
        )
        z.writestr(
            "[Content_Types].xml",
            '<?xml version="1.0"?><Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
            '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
            '<Default Extension="xml" ContentType="application/xml"/>'
            '<Override PartName="/ppt/presentation.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"/>'
            f"{overrides}</Types>",
        )
        z.writestr(
            "_rels/.rels",
            '<?xml version="1.0"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
            '<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="ppt/presentation.xml"/></Relationships>',
        )
        slide_ids = "".join(
            f'<p:sldId id="{255 + i}" r:id="rId{i}"/>' for i in range(1, slide_count + 1)
        )
        z.writestr(
            "ppt/presentation.xml",
            f'<?xml version="1.0"?><p:presentation {P_NS}>'
            f"<p:sldIdLst>{slide_ids}</p:sldIdLst>"
            '<p:sldSz cx="12192000" cy="6858000"/></p:presentation>',
        )
        rels = "".join(
            f'<Relationship Id="rId{i}" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/slide" Target="slides/slide{i}.xml"/>'
            for i in range(1, slide_count + 1)
        )
        z.writestr(
            "ppt/_rels/presentation.xml.rels",
            '<?xml version="1.0"?><Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
            f"{rels}</Relationships>",
        )
        if theme:
            z.writestr("ppt/theme/theme1.xml", theme)
        for i, body in enumerate(slide_bodies, start=1):
            z.writestr(
                f"ppt/slides/slide{i}.xml",
                f'<?xml version="1.0"?><p:sld {P_NS}><p:cSld><p:spTree>'
                '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr><p:grpSpPr/>'
                f"{body}</p:spTree></p:cSld></p:sld>",
            )
    return buffer.getvalue()


def _sp(x=914400, y=914400, w=914400, h=914400, prst="rect", fill='<a:solidFill><a:srgbClr val="4472C4"/></a:solidFill>', extra=""):
    return (
        f'<p:sp><p:nvSpPr><p:cNvPr id="2" name="Box"/><p:cNvSpPr/><p:nvPr/></p:nvSpPr>'
        f'<p:spPr><a:xfrm><a:off x="{x}" y="{y}"/><a:ext cx="{w}" cy="{h}"/></a:xfrm>'
        f'<a:prstGeom prst="{prst}"><a:avLst/></a:prstGeom>{fill}</p:spPr>{extra}</p:sp>'
    )


TEXT_BODY = (
    "<p:txBody><a:bodyPr/><a:lstStyle/>"
    '<a:p><a:pPr algn="ctr"><a:lnSpc><a:spcPct val="120000"/></a:lnSpc></a:pPr>'
    '<a:r><a:rPr lang="en-US" sz="2400"><a:solidFill><a:srgbClr val="222222"/></a:solidFill>'
    '<a:latin typeface="Georgia"/></a:rPr><a:t>Hello deck</a:t></a:r></a:p></p:txBody>'
)


def test_minimal_fixture_with_text_box():
    blob = _handmade_pptx([_sp(extra=TEXT_BODY)])
    deck, report = load_pptx(blob)
    assert len(deck.slides) == 1
    slide = deck.slides[0]
    assert len(slide.elements) == 1
    element = slide.elements[0]
    assert element.kind.name == "rectangle"
    assert element.text is not None
    assert element.text.runs[0].text == "Hello deck"
    assert element.text.runs[0].font_name == "Georgia"
    assert element.text.runs[0].font_size == 24.0
    assert element.text.alignment.value == "center"
    assert element.text.line_spacing == 1.2
    assert report.parsed_elements == 1


def test_chart_is_skipped_and_reported():
    chart = (
        '<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="5" name="Chart"/>'
        "<p:cNvGraphicFramePr/><p:nvPr/></p:nvGraphicFramePr>"
        '<p:xfrm><a:off x="0" y="0"/><a:ext cx="1000" cy="1000"/></p:xfrm>'
        '<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/chart"/></a:graphic></p:graphicFrame>'
    )
    deck, report = load_pptx(_handmade_pptx([_sp() + chart]))
    assert len(deck.slides[0].elements) == 1
    assert [s.reason for s in report.skipped] == ["chart"]


def test_table_is_skipped_and_reported():
    table = (
        '<p:graphicFrame><a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/table"/></a:graphic></p:graphicFrame>'
    )
    _, report = load_pptx(_handmade_pptx([table]))
    assert [s.reason for s in report.skipped] == ["table"]


def test_unsupported_preset_is_reported():
    _, report = load_pptx(_handmade_pptx([_sp(prst="wedgeRoundRectCallout")]))
    assert [s.reason for s in report.skipped] == ["unsupported_shape"]


def test_empty_zip_is_fatal():
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w"):
        pass
    with pytest.raises(IngestError) as err:
        load_pptx(buffer.getvalue())
    assert err.value.kind == "missing_presentation_part"


def test_not_a_zip_is_fatal():
    with pytest.raises(IngestError) as err:
        load_pptx(b"plain text, no archive")
    assert err.value.kind == "not_an_archive"


def test_malformed_slide_skipped_deck_survives():
    good = _sp()
    blob = _handmade_pptx([good, good])
    # corrupt the second slide part
    buffer = io.BytesIO()
    with zipfile.ZipFile(io.BytesIO(blob)) as src, zipfile.ZipFile(buffer, "w") as dst:
        for item in src.namelist():
            data = src.read(item)
            if item == "ppt/slides/slide2.xml":
                data = b"<p:sld busted"
            dst.writestr(item, data)
    deck, report = load_pptx(buffer.getvalue())
    assert len(deck.slides) == 1
    assert [s.reason for s in report.skipped] == ["other"]


def test_theme_scheme_color_resolution():
    theme = (
        '<?xml version="1.0"?><a:theme xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" name="T">'
        "<a:themeElements><a:clrScheme name=\"T\">"
        '<a:dk1><a:srgbClr val="101010"/></a:dk1><a:lt1><a:sysClr val="window" lastClr="FEFEFE"/></a:lt1>'
        '<a:dk2><a:srgbClr val="222222"/></a:dk2><a:lt2><a:srgbClr val="EEEEEE"/></a:lt2>'
        '<a:accent1><a:srgbClr val="336699"/></a:accent1><a:accent2><a:srgbClr val="669933"/></a:accent2>'
        '<a:accent3><a:srgbClr val="993366"/></a:accent3><a:accent4><a:srgbClr val="339966"/></a:accent4>'
        '<a:accent5><a:srgbClr val="663399"/></a:accent5><a:accent6><a:srgbClr val="996633"/></a:accent6>'
        '<a:hlink><a:srgbClr val="0000EE"/></a:hlink><a:folHlink><a:srgbClr val="551A8B"/></a:folHlink>'
        "</a:clrScheme></a:themeElements></a:theme>"
    )
    body = _sp(fill='<a:solidFill><a:schemeClr val="accent1"/></a:solidFill>') + _sp(
        fill='<a:solidFill><a:schemeClr val="tx1"/></a:solidFill>'
    )
    deck, _ = load_pptx(_handmade_pptx([body], theme=theme))
    fills = [e.fill.colors[0].rgb for e in deck.slides[0].elements]
    assert fills == ["336699", "101010"]  # accent1 direct, tx1 via dk1 alias


def test_alpha_transform():
    fill = '<a:solidFill><a:srgbClr val="FF0000"><a:alpha val="25000"/></a:srgbClr></a:solidFill>'
    deck, _ = load_pptx(_handmade_pptx([_sp(fill=fill)]))
    color = deck.slides[0].elements[0].fill.colors[0]
    assert color.rgb == "FF0000"
    assert color.alpha == pytest.approx(0.25)


def test_grouped_shapes_flatten_to_absolute_coordinates():
    group = (
        "<p:grpSp><p:nvGrpSpPr><p:cNvPr id=\"9\" name=\"G\"/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>"
        "<p:grpSpPr><a:xfrm>"
        '<a:off x="1000000" y="2000000"/><a:ext cx="2000000" cy="2000000"/>'
        '<a:chOff x="0" y="0"/><a:chExt cx="1000000" cy="1000000"/>'
        "</a:xfrm></p:grpSpPr>"
        + _sp(x=0, y=0, w=500000, h=500000)
        + "</p:grpSp>"
    )
    deck, _ = load_pptx(_handmade_pptx([group]))
    element = deck.slides[0].elements[0]
    # offset 1M/2M, children scale x2
    assert element.position == Geometry(1000000, 2000000, 1000000, 1000000)


def test_ingest_totality_on_fuzzed_input(rng):
    for _ in range(60):
        size = rng.randrange(0, 400)
        data = bytes(rng.randrange(256) for _ in range(size))
        try:
            load_pptx(data)
        except IngestError:
            pass  # reported errors are fine, crashes are not
    # valid zip with junk members
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as z:
        z.writestr("ppt/presentation.xml", "<not really xml")
        z.writestr("junk.bin", b"\x00\x01")
    with pytest.raises(IngestError):
        load_pptx(buffer.getvalue())


def test_scope_soundness_everything_validates():
    deck, _ = load_pptx(export_pptx(sample_deck(8)))
    for slide in deck.slides:
        assert validate(slide) == []


def _char_stream(frame):
    return [
        (ch, r.font_name, r.font_size, r.color.rgb)
        for r in frame.runs
        for ch in r.text
    ]


def test_export_load_round_trip_preserves_scope():
    deck = sample_deck(10)
    loaded, report = load_pptx(export_pptx(deck))
    assert len(loaded.slides) == len(deck.slides)
    for original, ingested in zip(deck.slides, loaded.slides):
        assert len(ingested.elements) == len(original.elements)
        for a, b in zip(original.elements, ingested.elements):
            assert b.position == a.position
            assert b.fill.mode == a.fill.mode
            assert [c.rgb for c in b.fill.colors] == [c.rgb for c in a.fill.colors]
            assert b.kind == a.kind
            if a.text is not None:
                assert _char_stream(b.text) == _char_stream(a.text)
                assert b.text.alignment == a.text.alignment
                assert b.text.line_spacing == a.text.line_spacing


def test_round_trip_stability_second_pass():
    deck = sample_deck(6)
    once, report_once = load_pptx(export_pptx(deck))
    twice, report_twice = load_pptx(export_pptx(once))
    assert [to_json(s) for s in once.slides] == [to_json(s) for s in twice.slides]
    assert report_once.payload() == report_twice.payload()


def test_empty_deck_round_trip():
    deck, report = load_pptx(export_pptx(Deck.of([])))
    assert deck.slides == []
    assert report.parsed_elements == 0


def test_gradient_fill_round_trip():
    doc = SlideDoc(
        12192000,
        6858000,
        [
            Element(
                "e0",
                ShapeKind.auto("rectangle"),
                Geometry(0, 0, 2000000, 2000000),
                Fill(FillMode.GRADIENT, [Color("112233"), Color("445566"), Color("778899")]),
            )
        ],
        "grad",
    )
    loaded, _ = load_pptx(export_pptx(Deck.of([doc])))
    fill = loaded.slides[0].elements[0].fill
    assert fill.mode == FillMode.GRADIENT
    assert [c.rgb for c in fill.colors] == ["112233", "445566", "778899"]


def test_random_docs_survive_export_ingest(rng):
    docs = []
    for _ in range(6):
        doc = random_doc(rng, 6)
        # exporter requires non-negative geometry inside its own scope
        docs.append(doc)
    deck = Deck.of(docs)
    loaded, _ = load_pptx(export_pptx(deck))
    assert len(loaded.slides) == len(docs)
    for original, ingested in zip(docs, loaded.slides):
        assert len(ingested.elements) == len(original.elements)


def test_deck_json_round_trip():
    deck = sample_deck(4)
    text = deck_to_json(deck)
    parsed = deck_from_json(text)
    assert deck_to_json(parsed) == text
    assert parsed.metadata.slide_count == 4


def test_title_survives_pptx_round_trip():
    deck = Deck.of([sample_deck(1).slides[0]], title="Launch review")
    loaded, _ = load_pptx(export_pptx(deck))
    assert loaded.metadata.title == "Launch review"


def test_strict_namespace_variant_parses():
    blob = _handmade_pptx([_sp(extra=TEXT_BODY)])
    swapped = io.BytesIO()
    replacements = [
        (b"http://schemas.openxmlformats.org/presentationml/2006/main",
         b"http://purl.oclc.org/ooxml/presentationml/main"),
        (b"http://schemas.openxmlformats.org/drawingml/2006/main",
         b"http://purl.oclc.org/ooxml/drawingml/main"),
        (b"http://schemas.openxmlformats.org/officeDocument/2006/relationships",
         b"http://purl.oclc.org/ooxml/officeDocument/relationships"),
    ]
    with zipfile.ZipFile(io.BytesIO(blob)) as src, zipfile.ZipFile(swapped, "w") as dst:
        for item in src.namelist():
            data = src.read(item)
            if item.startswith("ppt/") and item.endswith(".xml"):
                for old, new in replacements:
                    data = data.replace(old, new)
            dst.writestr(item, data)
    deck, report = load_pptx(swapped.getvalue())
    assert len(deck.slides) == 1
    element = deck.slides[0].elements[0]
    assert element.kind.name == "rectangle"
    assert element.text.runs[0].text == "Hello deck"
