from slideloop.model import (
    Color,
    Fill,
    FillMode,
    ShapeKind,
    SlideDoc,
    Status,
    TextFrame,
    TextRun,
    diff,
    mark_all_tentative,
    next_element_id,
    semantically_equal,
    tentative_ids,
    validate,
    with_statuses,
)

from conftest import random_doc


def test_validate_accepts_valid_doc(simple_doc):
    assert validate(simple_doc) == []


def test_validate_flags_duplicate_ids(simple_doc):
    simple_doc.elements[1].id = "e0"
    violations = validate(simple_doc)
    assert len(violations) == 1
    assert violations[0].rule == "duplicate_id"
    assert violations[0].element_id == "e0"
    assert "2 elements" in violations[0].message


def test_validate_flags_single_color_gradient(simple_doc):
    simple_doc.elements[0].fill = Fill(FillMode.GRADIENT, [Color("FF0000")])
    violations = validate(simple_doc)
    assert [v.rule for v in violations] == ["fill_color_count"]
    assert violations[0].element_id == "e0"


def test_validate_flags_media_with_text(simple_doc):
    simple_doc.elements[0].kind = ShapeKind.placeholder("image")
    simple_doc.elements[0].text = TextFrame(
        [TextRun("x", "Georgia", 12.0, Color("000000"))]
    )
    assert "media_with_text" in [v.rule for v in validate(simple_doc)]


def test_validate_flags_unknown_shape(simple_doc):
    simple_doc.elements[0].kind = ShapeKind.auto("smart_art")
    assert "unknown_shape" in [v.rule for v in validate(simple_doc)]


def test_validate_flags_bad_canvas():
    doc = SlideDoc(0, 6858000, [], "x")
    assert [v.rule for v in validate(doc)] == ["canvas_positive"]


def test_validate_flags_empty_run_among_many(simple_doc):
    simple_doc.elements[1].text.runs.append(TextRun("", "Georgia", 12.0, Color("000000")))
    assert "empty_run_text" in [v.rule for v in validate(simple_doc)]


def test_empty_sole_run_is_allowed(simple_doc):
    simple_doc.elements[1].text.runs = [TextRun("", "Georgia", 12.0, Color("000000"))]
    assert validate(simple_doc) == []


def test_diff_identity(simple_doc):
    assert diff(simple_doc, simple_doc) == []
    assert semantically_equal(simple_doc, simple_doc)


def test_diff_position_shift(simple_doc):
    other = simple_doc.clone()
    other.elements[0].position.x += 5
    entries = diff(simple_doc, other)
    assert len(entries) == 1
    assert entries[0].id == "e0"
    assert entries[0].change == "modified"
    assert entries[0].fields == ["position.x"]


def test_diff_removed_element(simple_doc):
    other = simple_doc.clone()
    del other.elements[1]
    entries = diff(simple_doc, other)
    assert [(e.id, e.change) for e in entries] == [("e1", "removed")]


def test_diff_add_remove_symmetry(rng):
    a = random_doc(rng, 6)
    b = a.clone()
    if b.elements:
        dropped = b.elements.pop()
        forward = {(e.id, e.change) for e in diff(a, b)}
        backward = {(e.id, e.change) for e in diff(b, a)}
        assert (dropped.id, "removed") in forward
        assert (dropped.id, "added") in backward


def test_diff_reports_doc_level_changes(simple_doc):
    other = simple_doc.clone()
    other.canvas_width += 1
    entries = diff(simple_doc, other)
    assert entries[0].id == "$doc"
    assert entries[0].fields == ["canvas_width"]


def test_diff_reports_order_change(simple_doc):
    other = simple_doc.clone()
    other.elements.reverse()
    entries = diff(simple_doc, other)
    assert entries[0].id == "$doc"
    assert "element_order" in entries[0].fields


def test_diff_status_change(simple_doc):
    labeled = with_statuses(simple_doc, {"e1"})
    entries = diff(simple_doc, labeled)
    assert [(e.id, e.fields) for e in entries] == [("e1", ["status"])]


def test_status_helpers(simple_doc):
    labeled = mark_all_tentative(simple_doc)
    assert tentative_ids(labeled) == {"e0", "e1"}
    assert all(e.status == Status.TENTATIVE for e in labeled.elements)
    assert tentative_ids(simple_doc) == set()  # input untouched


def test_next_element_id(simple_doc):
    assert next_element_id(simple_doc) == "e2"
    simple_doc.elements[0].id = "title"
    assert next_element_id(simple_doc) == "e2"
    assert next_element_id(SlideDoc(1, 1, [], "")) == "e0"


def test_shape_registry_has_34_entries():
    from slideloop.model import SHAPE_NAMES, shape_preset

    assert len(SHAPE_NAMES) == 34
    assert len(set(SHAPE_NAMES)) == 34
    for name in SHAPE_NAMES:
        assert shape_preset(name)
