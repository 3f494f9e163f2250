import xml.etree.ElementTree as ET

import pytest

from slideloop.model import (
    Color,
    Element,
    Fill,
    FillMode,
    Geometry,
    ShapeKind,
    SlideDoc,
    with_statuses,
)
from slideloop.render import RenderOptions, render_svg
from slideloop.samples import sample_corpus, sample_slide


def _children(svg_text):
    root = ET.fromstring(svg_text)
    return root, [child.tag.split("}")[1] for child in root]


def test_empty_doc_renders_background_only():
    doc = SlideDoc(12192000, 6858000, [], "empty")
    root, tags = _children(render_svg(doc))
    assert tags == ["rect"]
    assert root.get("width") == "1280"
    assert root.get("height") == "720"


def test_emu_to_pixel_conversion():
    doc = SlideDoc(
        12192000,
        6858000,
        [
            Element(
                "e0",
                ShapeKind.auto("rectangle"),
                Geometry(914400, 914400, 914400, 914400),
                Fill.solid("FF0000"),
            )
        ],
        "px",
    )
    root, _ = _children(render_svg(doc))
    rect = root.find(".//{http://www.w3.org/2000/svg}g/{http://www.w3.org/2000/svg}rect")
    assert rect.get("x") == "96"
    assert rect.get("y") == "96"
    assert rect.get("width") == "96"
    assert rect.get("height") == "96"


def test_group_per_element_in_z_order():
    doc = sample_slide(0)
    root, _ = _children(render_svg(doc))
    groups = [c for c in root if c.tag.endswith("}g")]
    assert [g.get("data-element-id") for g in groups] == doc.element_ids()


def test_tentative_overlay_count():
    doc = with_statuses(sample_slide(1), {"e1"})
    root, _ = _children(render_svg(doc, RenderOptions(highlight_tentative=True)))
    overlays = [c for c in root if c.get("class") == "tentative-overlay"]
    assert len(overlays) == 1
    # highlighting off: no overlays
    root_off, _ = _children(render_svg(doc, RenderOptions(highlight_tentative=False)))
    assert [c for c in root_off if c.get("class") == "tentative-overlay"] == []


def test_node_count_invariant():
    for i in range(6):
        doc = sample_slide(i)
        labeled = with_statuses(doc, set(doc.element_ids()[:2]))
        root, _ = _children(render_svg(labeled, RenderOptions(highlight_tentative=True)))
        kids = list(root)
        defs = [c for c in kids if c.tag.endswith("}defs")]
        groups = [c for c in kids if c.tag.endswith("}g")]
        overlays = [c for c in kids if c.get("class") == "tentative-overlay"]
        background = [
            c for c in kids if c.tag.endswith("}rect") and c.get("class") is None
        ]
        assert len(groups) == len(doc.elements)
        assert len(overlays) == 2
        assert len(background) == 1
        assert len(kids) == len(defs) + len(groups) + len(overlays) + 1


def test_determinism():
    doc = sample_slide(3)
    options = RenderOptions(highlight_tentative=True)
    assert render_svg(doc, options) == render_svg(doc, options)


def test_all_registry_shapes_render():
    from slideloop.model import SHAPE_NAMES

    elements = [
        Element(
            f"e{i}",
            ShapeKind.auto(name),
            Geometry(100000 + i * 300000, 100000, 250000, 250000),
            Fill.solid("4472C4"),
        )
        for i, name in enumerate(SHAPE_NAMES)
    ]
    doc = SlideDoc(12192000, 6858000, elements, "all-shapes")
    root, _ = _children(render_svg(doc))
    assert len([c for c in root if c.tag.endswith("}g")]) == len(SHAPE_NAMES)


def test_gradient_and_pattern_emit_defs():
    doc = SlideDoc(
        12192000,
        6858000,
        [
            Element(
                "e0",
                ShapeKind.auto("rectangle"),
                Geometry(0, 0, 1000000, 1000000),
                Fill(FillMode.GRADIENT, [Color("112233"), Color("445566")]),
            ),
            Element(
                "e1",
                ShapeKind.auto("oval"),
                Geometry(2000000, 0, 1000000, 1000000),
                Fill(FillMode.PATTERN, [Color("AA0000"), Color("EEEEEE")]),
            ),
        ],
        "defs",
    )
    svg = render_svg(doc)
    assert 'id="grad-e0"' in svg and 'url(#grad-e0)' in svg
    assert 'id="pat-e1"' in svg and 'url(#pat-e1)' in svg


def test_rotation_transform():
    doc = SlideDoc(
        12192000,
        6858000,
        [
            Element(
                "e0",
                ShapeKind.auto("rectangle"),
                Geometry(0, 0, 914400, 914400, rotation=45.0),
                Fill.solid("FF0000"),
            )
        ],
        "rot",
    )
    root, _ = _children(render_svg(doc))
    g = next(c for c in root if c.tag.endswith("}g"))
    assert g.get("transform") == "rotate(45 48 48)"


def test_media_placeholder_rendering():
    doc = sample_slide(0)
    media = next(e for e in doc.elements if e.kind.is_media)
    root, _ = _children(render_svg(doc))
    g = next(c for c in root if c.get("data-element-id") == media.id)
    assert g.get("data-kind") in ("image", "video")
    assert len(g) == 3  # frame + two diagonals


def test_corpus_renders_valid_xml():
    for doc in sample_corpus(10):
        ET.fromstring(render_svg(doc))


def test_bad_ppi_rejected():
    with pytest.raises(ValueError):
        RenderOptions(pixels_per_inch=0)
