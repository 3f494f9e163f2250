from .deck import (  # noqa: F401
    Deck,
    DeckMetadata,
    IngestReport,
    SKIP_REASONS,
    SkipEntry,
    deck_from_json,
    deck_from_payload,
    deck_payload,
    deck_to_json,
)
from .reader import load_pptx  # noqa: F401
from .writer import export_pptx  # noqa: F401

__all__ = [
    "Deck",
    "DeckMetadata",
    "IngestReport",
    "SKIP_REASONS",
    "SkipEntry",
    "deck_from_json",
    "deck_from_payload",
    "deck_payload",
    "deck_to_json",
    "export_pptx",
    "load_pptx",
]
