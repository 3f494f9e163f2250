"""Deck container: an ordered list of slide documents plus metadata."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..codec import doc_from_payload, doc_payload
from ..errors import SchemaError
from ..model import SlideDoc

#: Closed set of reasons for skipping out-of-scope content on ingest.
SKIP_REASONS = ("unsupported_shape", "table", "chart", "media_payload_dropped", "other")


@dataclass
class DeckMetadata:
    title: str = ""
    slide_count: int = 0


@dataclass
class Deck:
    slides: list[SlideDoc] = field(default_factory=list)
    metadata: DeckMetadata = field(default_factory=DeckMetadata)

    @classmethod
    def of(cls, slides: list[SlideDoc], title: str = "") -> "Deck":
        return cls(slides=list(slides), metadata=DeckMetadata(title, len(slides)))


@dataclass
class SkipEntry:
    slide_index: int
    reason: str  # one of SKIP_REASONS
    detail: str = ""


@dataclass
class IngestReport:
    parsed_elements: int = 0
    skipped: list[SkipEntry] = field(default_factory=list)

    def add_skip(self, slide_index: int, reason: str, detail: str = "") -> None:
        assert reason in SKIP_REASONS, reason
        self.skipped.append(SkipEntry(slide_index, reason, detail))

    def payload(self) -> dict:
        return {
            "parsed_elements": self.parsed_elements,
            "skipped": [
                {"slide_index": s.slide_index, "reason": s.reason, "detail": s.detail}
                for s in self.skipped
            ],
        }


def deck_payload(deck: Deck) -> dict:
    return {
        "metadata": {
            "title": deck.metadata.title,
            "slide_count": deck.metadata.slide_count,
        },
        "slides": [doc_payload(s) for s in deck.slides],
    }


def deck_to_json(deck: Deck) -> str:
    return json.dumps(deck_payload(deck), separators=(",", ":"), ensure_ascii=False)


def deck_from_payload(data: dict, tolerant: bool = False) -> Deck:
    if not isinstance(data, dict) and not hasattr(data, "__iter__"):
        raise SchemaError("expected deck object", "$")
    mapping = dict(data)
    slides_v = mapping.get("slides")
    if not isinstance(slides_v, list):
        raise SchemaError("missing 'slides' array", "slides")
    slides = [doc_from_payload(p, tolerant=tolerant) for p in slides_v]
    meta = dict(mapping.get("metadata") or {})
    count = meta.get("slide_count", len(slides))
    if count != len(slides):
        raise SchemaError(
            f"slide_count {count} does not match {len(slides)} slides", "metadata.slide_count"
        )
    return Deck(slides=slides, metadata=DeckMetadata(meta.get("title", ""), len(slides)))


def deck_from_json(text: str, tolerant: bool = False) -> Deck:
    from ..codec import _loads, _strip_trailing_commas

    if tolerant:
        text = _strip_trailing_commas(text)
    return deck_from_payload(_loads(text), tolerant=tolerant)
