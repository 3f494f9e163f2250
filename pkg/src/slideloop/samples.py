"""Built-in sample corpus: deterministic, well-formed slides.

The corpus stands in for a real deck collection in tests, demos and the
acceptance suite. Every slide is constructed to pass the heuristic reviewer
cleanly (aligned edges, non-default fonts, a real palette, no stray
duplicates), so any flag raised on a perturbed variant is attributable to
the perturbation. The generator asserts those properties at build time.
"""

from __future__ import annotations

import random

from .codec import TOKEN_BUDGET, estimate_token_length, to_json
from .heuristics import heuristic_flags
from .model import (
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
    validate,
)
from .perturb import PerturbConfig, PerturbationLog, perturb
from .pptx import Deck

CANVAS = (12192000, 6858000)

_PALETTES = [
    # bar, card, accent, title text, body text
    ("1F3864", "4472C4", "ED7D31", "F2F2F2", "1A1A1A"),
    ("2E5E4E", "70AD47", "FFC000", "FDFDF5", "143323"),
    ("5B2C6F", "8E44AD", "F1C40F", "F8F1FC", "2C0E38"),
    ("0F4C4C", "148F8F", "F39C12", "EAF7F7", "07302F"),
    ("7F2704", "D95F02", "FEC44F", "FFF5EB", "3B1200"),
    ("44546A", "8496B0", "D6DCE5", "F5F7FA", "222A35"),
]

_FONT_PAIRS = [
    ("Georgia", "Verdana"),
    ("Montserrat", "Lato"),
    ("Palatino", "Tahoma"),
    ("Garamond", "Trebuchet MS"),
]

_TITLES = [
    "Quarterly business review",
    "Design system rollout",
    "Research findings",
    "Launch readiness",
    "Team goals and milestones",
    "Customer feedback themes",
    "Hiring plan overview",
    "Platform migration status",
]

_BODIES = [
    "Revenue grew in three of four segments",
    "Adoption doubled across pilot teams",
    "Latency is down and reliability is up",
    "Two risks carry into next quarter",
    "Budget tracks the approved envelope",
    "Partner integrations ship next sprint",
    "Support volume returned to baseline",
    "Three initiatives need an owner",
]

_ACCENT_SHAPES = ("oval", "hexagon", "star_5", "diamond", "pentagon", "chevron")

_MARGIN = 1000000
_ROW0 = 1400000
_ROW_STEP = 1700000


def sample_slide(index: int) -> SlideDoc:
    """Deterministic well-formed slide ``index``; safe for any index >= 0."""
    rng = random.Random(0xC0FFEE + index)
    bar, card, accent, title_rgb, body_rgb = _PALETTES[index % len(_PALETTES)]
    heading, body_font = _FONT_PAIRS[index % len(_FONT_PAIRS)]
    w, h = CANVAS
    elements: list[Element] = []

    def add(kind, geometry, fill, text=None):
        elements.append(
            Element(
                id=f"e{len(elements)}",
                kind=kind,
                position=geometry,
                fill=fill,
                text=text,
            )
        )

    # top bar with the title
    add(ShapeKind.auto("rectangle"), Geometry(0, 0, w, 900000), Fill.solid(bar))
    add(
        ShapeKind.auto("rectangle"),
        Geometry(_MARGIN, 150000, 6500000, 600000),
        Fill.solid(bar),
        _title_text(rng, heading, title_rgb),
    )

    # body cards, left-aligned on the margin
    rows = 1 + (index % 3)
    card_width = 6500000
    for row in range(rows):
        y = _ROW0 + row * _ROW_STEP
        add(
            ShapeKind.auto("rounded_rectangle"),
            Geometry(_MARGIN, y, card_width, 1200000),
            Fill.solid(card),
            _body_text(rng, body_font, title_rgb),
        )

    # right column: media or a gradient panel
    right_x = 8200000
    if index % 2 == 0:
        media = "image" if index % 4 == 0 else "video"
        add(ShapeKind.placeholder(media), Geometry(right_x, _ROW0, 3000000, 2200000), Fill.none())
    else:
        add(
            ShapeKind.auto("rectangle"),
            Geometry(right_x, _ROW0, 3000000, 2200000),
            Fill(FillMode.GRADIENT, [Color(card), Color(accent)]),
        )

    # decorative accent, clear of every alignment line
    shape = _ACCENT_SHAPES[index % len(_ACCENT_SHAPES)]
    add(
        ShapeKind.auto(shape),
        Geometry(right_x + 400000, 4400000, 1400000, 1400000, rotation=float(15 * (index % 3))),
        Fill.solid(accent),
    )

    # footer rule aligned on the margin
    add(ShapeKind.auto("line"), Geometry(_MARGIN, 6300000, 7000000, 0), Fill.solid(accent))

    doc = SlideDoc(w, h, elements, source_id=f"samples/slide{index}")
    assert validate(doc) == [], f"sample {index} invalid"
    assert heuristic_flags(doc) == set(), f"sample {index} not heuristically clean"
    assert estimate_token_length(to_json(doc)) < TOKEN_BUDGET
    return doc


def _title_text(rng, font, rgb):
    return TextFrame(
        runs=[TextRun(rng.choice(_TITLES), font, 28.0, Color(rgb))],
        line_spacing=1.1,
        alignment=Alignment.LEFT,
    )


def _body_text(rng, font, rgb):
    return TextFrame(
        runs=[TextRun(rng.choice(_BODIES), font, 16.0, Color(rgb))],
        line_spacing=1.2,
        alignment=Alignment.LEFT,
    )


def sample_corpus(count: int = 50) -> list[SlideDoc]:
    return [sample_slide(i) for i in range(count)]


def sample_deck(count: int = 10) -> Deck:
    return Deck.of(sample_corpus(count), title="Sample deck")


def perturbed_fixture_set(
    count: int = 50, severity: float = 0.35, seed: int = 4242
) -> list[tuple[SlideDoc, SlideDoc, PerturbationLog]]:
    """(original, perturbed, log) triples over the sample corpus; the
    standard evaluation set used by tests and the acceptance suite."""
    out = []
    for i, doc in enumerate(sample_corpus(count)):
        config = PerturbConfig(seed=seed ^ i, severity=severity)
        perturbed, log = perturb(doc, config)
        out.append((doc, perturbed, log))
    return out


__all__ = ["CANVAS", "perturbed_fixture_set", "sample_corpus", "sample_deck", "sample_slide"]
