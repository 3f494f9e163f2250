from __future__ import annotations

import random

import pytest

from slideloop.model import (
    Alignment,
    Color,
    Element,
    Fill,
    FillMode,
    Geometry,
    SHAPE_NAMES,
    ShapeKind,
    SlideDoc,
    TextFrame,
    TextRun,
)

CANVAS_W, CANVAS_H = 12192000, 6858000

FONTS = ("Georgia", "Montserrat", "Lato", "Verdana", "Arial", "Roboto")
WORDS = (
    "alignment", "palette", "draft", "review", "contrast", "balance",
    "layout", "margin", "rhythm", "grid",
)


def random_color(rng: random.Random) -> Color:
    return Color(f"{rng.randrange(1 << 24):06X}", rng.choice((1.0, 1.0, 0.5)))


def random_fill(rng: random.Random) -> Fill:
    mode = rng.choice(list(FillMode))
    if mode == FillMode.NONE:
        return Fill.none()
    if mode == FillMode.SOLID:
        return Fill(mode, [random_color(rng)])
    count = rng.randint(2, 4)
    return Fill(mode, [random_color(rng) for _ in range(count)],
                rng.choice((0.0, 0.0, 0.25)))


def random_text(rng: random.Random) -> TextFrame:
    runs = [
        TextRun(
            " ".join(rng.choices(WORDS, k=rng.randint(1, 6))),
            rng.choice(FONTS),
            rng.choice((12.0, 16.0, 18.0, 24.0, 28.5)),
            random_color(rng),
        )
        for _ in range(rng.randint(1, 3))
    ]
    return TextFrame(
        runs=runs,
        line_spacing=rng.choice((1.0, 1.15, 1.5)),
        alignment=rng.choice(list(Alignment)),
    )


def random_element(rng: random.Random, eid: str) -> Element:
    if rng.random() < 0.15:
        kind = ShapeKind.placeholder(rng.choice(("image", "video")))
        text = None
    else:
        kind = ShapeKind.auto(rng.choice(SHAPE_NAMES))
        text = random_text(rng) if rng.random() < 0.6 else None
    return Element(
        id=eid,
        kind=kind,
        position=Geometry(
            x=rng.randrange(-100000, CANVAS_W),
            y=rng.randrange(-100000, CANVAS_H),
            width=rng.randrange(0, CANVAS_W // 2),
            height=rng.randrange(0, CANVAS_H // 2),
            rotation=rng.choice((0.0, 0.0, 15.0, 90.0, 337.5)),
        ),
        fill=random_fill(rng),
        text=text,
    )


def random_doc(rng: random.Random, max_elements: int = 10) -> SlideDoc:
    n = rng.randint(0, max_elements)
    return SlideDoc(
        canvas_width=CANVAS_W,
        canvas_height=CANVAS_H,
        elements=[random_element(rng, f"e{i}") for i in range(n)],
        source_id=f"random/{rng.randrange(1 << 30)}",
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)


@pytest.fixture
def simple_doc() -> SlideDoc:
    return SlideDoc(
        canvas_width=CANVAS_W,
        canvas_height=CANVAS_H,
        elements=[
            Element(
                "e0",
                ShapeKind.auto("rectangle"),
                Geometry(0, 0, 914400, 914400),
                Fill.solid("FF0000"),
            ),
            Element(
                "e1",
                ShapeKind.auto("oval"),
                Geometry(2000000, 1000000, 1500000, 1500000),
                Fill.solid("4472C4"),
                TextFrame([TextRun("hello", "Georgia", 20.0, Color("1A1A1A"))]),
            ),
        ],
        source_id="tests/simple",
    )
