"""Rough-draft simulation by seeded perturbation of finished slides.

Finished slides are the only designs normally available, so training pairs
are manufactured: a perturbation pass damages a slide in controlled ways
(removing shapes, duplicating shapes, shifting positions, resetting colors,
fills and text attributes) and records a ground-truth log. Replaying the log
in reverse reconstructs the original exactly, which makes the log usable as
an oracle for reviewer/contributor evaluation.

Everything here is a pure function of ``(doc, config)``.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable

from .codec import (
    element_payload,
    element_from_payload,
    estimate_token_length,
    fill_payload,
    fill_from_payload,
    geometry_payload,
    geometry_from_payload,
    text_payload,
    text_from_payload,
    color_payload,
    color_from_payload,
    to_json,
    TOKEN_BUDGET,
)
from .errors import BudgetError, ConsistencyError
from .model import (
    Color,
    Element,
    Fill,
    SlideDoc,
    clear_statuses,
    next_element_id,
    with_statuses,
)


class PerturbationKind(str, Enum):
    SHAPE_REMOVAL = "shape_removal"
    SHAPE_DUPLICATION = "shape_duplication"
    POSITION_SHIFT = "position_shift"
    COLOR_ALTERATION = "color_alteration"
    TEXT_ATTRIBUTE_RESET = "text_attribute_reset"
    FILL_RESET = "fill_reset"


ALL_KINDS: tuple[PerturbationKind, ...] = tuple(PerturbationKind)

#: Metrics category for each perturbation kind. Duplications count under the
#: removal category (both are shape-count flaws); fill resets are color flaws.
CATEGORY_BY_KIND: dict[PerturbationKind, str] = {
    PerturbationKind.SHAPE_REMOVAL: "shape_removal",
    PerturbationKind.SHAPE_DUPLICATION: "shape_removal",
    PerturbationKind.POSITION_SHIFT: "shape_placement",
    PerturbationKind.COLOR_ALTERATION: "color_attributes",
    PerturbationKind.FILL_RESET: "color_attributes",
    PerturbationKind.TEXT_ATTRIBUTE_RESET: "text_attributes",
}

CATEGORIES: tuple[str, ...] = (
    "shape_placement",
    "shape_removal",
    "color_attributes",
    "text_attributes",
)

DEFAULT_FONTS: tuple[str, ...] = ("Arial", "Roboto", "Calibri")


@dataclass(frozen=True)
class MagnitudeTable:
    """Per-kind distribution parameters; defaults give visible but plausible
    drafts. The source material does not pin these numbers down."""

    position_shift_min_frac: float = 0.02
    position_shift_max_frac: float = 0.10
    duplicate_offset_frac: float = 0.01  # of the element's own size
    color_default_reset_prob: float = 0.5
    reset_fonts: tuple[str, ...] = DEFAULT_FONTS
    reset_font_size: float = 18.0
    reset_alignment: str = "left"
    default_text_rgb: str = "000000"
    default_fill_rgb: str = "FFFFFF"


@dataclass(frozen=True)
class PerturbConfig:
    seed: int = 0
    severity: float = 0.3
    enabled_kinds: tuple[PerturbationKind, ...] = ALL_KINDS
    magnitudes: MagnitudeTable = field(default_factory=MagnitudeTable)
    token_budget: int = TOKEN_BUDGET


@dataclass
class LogEntry:
    element_id: str
    kind: PerturbationKind
    original: dict | None = None  # field snapshot before the perturbation
    applied: dict | None = None  # field snapshot after


@dataclass
class PerturbationLog:
    entries: list[LogEntry] = field(default_factory=list)
    seed: int = 0
    severity: float = 0.0
    warnings: list[str] = field(default_factory=list)

    def ids_by_category(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {c: set() for c in CATEGORIES}
        for e in self.entries:
            if e.kind != PerturbationKind.SHAPE_REMOVAL:
                out[CATEGORY_BY_KIND[e.kind]].add(e.element_id)
        return out


def ground_truth_ids(log: PerturbationLog) -> set[str]:
    """Element ids a perfect reviewer should flag: every perturbed element
    still present in the draft (removed elements cannot be flagged)."""
    return {
        e.element_id
        for e in log.entries
        if e.kind != PerturbationKind.SHAPE_REMOVAL
    }


# --- applying perturbations --------------------------------------------------


def perturb(doc: SlideDoc, config: PerturbConfig) -> tuple[SlideDoc, PerturbationLog]:
    """Damage ``doc`` according to ``config``; deterministic in its inputs.

    Roughly ``severity * len(elements)`` elements receive one perturbation
    each (at least one whenever severity > 0). Removal never takes the last
    text-bearing element: content is the user's, only design is simulated.
    """
    log = PerturbationLog(seed=config.seed, severity=config.severity)
    work = clear_statuses(doc)
    if config.severity <= 0:
        return work, log
    if not work.elements:
        log.warnings.append("document has no elements; nothing to perturb")
        return work, log

    rng = random.Random(config.seed)
    count = min(len(work.elements), max(1, round(config.severity * len(work.elements))))
    target_ids = rng.sample(work.element_ids(), count)
    used_ids = set(work.element_ids())

    for target in target_ids:
        elem = work.get(target)
        kinds = [
            k
            for k in ALL_KINDS
            if k in config.enabled_kinds and _applicable(k, elem, work, config.magnitudes)
        ]
        if not kinds:
            log.warnings.append(f"no applicable perturbation for element {target}")
            continue
        kind = rng.choice(kinds)
        entry = _APPLY[kind](work, elem, rng, config.magnitudes, used_ids)
        log.entries.append(entry)
    return work, log


def _text_bearing_count(doc: SlideDoc) -> int:
    return sum(1 for e in doc.elements if e.text is not None)


def _applicable(
    kind: PerturbationKind, elem: Element, doc: SlideDoc, mag: MagnitudeTable
) -> bool:
    if kind == PerturbationKind.SHAPE_REMOVAL:
        if elem.kind.type != "auto_shape":
            return False
        return not (elem.text is not None and _text_bearing_count(doc) == 1)
    if kind == PerturbationKind.TEXT_ATTRIBUTE_RESET:
        return elem.text is not None
    if kind == PerturbationKind.COLOR_ALTERATION:
        return bool(elem.fill.colors) or elem.text is not None
    if kind == PerturbationKind.FILL_RESET:
        return elem.fill != Fill.solid(mag.default_fill_rgb)
    return True  # position_shift, shape_duplication


def _apply_removal(work, elem, rng, mag, used_ids) -> LogEntry:
    index = work.elements.index(elem)
    snapshot = {"element": element_payload(elem, False), "index": index}
    work.elements.pop(index)
    return LogEntry(elem.id, PerturbationKind.SHAPE_REMOVAL, original=snapshot)


def _apply_duplication(work, elem, rng, mag, used_ids) -> LogEntry:
    dup = copy.deepcopy(elem)
    dup.id = _fresh_id(work, used_ids)
    used_ids.add(dup.id)
    dup.position.x += max(1, round(elem.position.width * mag.duplicate_offset_frac))
    dup.position.y += max(1, round(elem.position.height * mag.duplicate_offset_frac))
    index = work.elements.index(elem) + 1
    work.elements.insert(index, dup)
    return LogEntry(
        dup.id,
        PerturbationKind.SHAPE_DUPLICATION,
        applied={
            "element": element_payload(dup, False),
            "index": index,
            "source_id": elem.id,
        },
    )


def _fresh_id(work: SlideDoc, used_ids: set[str]) -> str:
    candidate = next_element_id(work)
    n = int(candidate[1:])
    while f"e{n}" in used_ids:
        n += 1
    return f"e{n}"


def _apply_position_shift(work, elem, rng, mag, used_ids) -> LogEntry:
    before = geometry_payload(elem.position)
    dx = round(
        rng.uniform(mag.position_shift_min_frac, mag.position_shift_max_frac)
        * work.canvas_width
    ) * rng.choice((-1, 1))
    dy = round(
        rng.uniform(mag.position_shift_min_frac, mag.position_shift_max_frac)
        * work.canvas_height
    ) * rng.choice((-1, 1))
    if dx == 0 and dy == 0:
        dx = 1
    elem.position.x += dx
    elem.position.y += dy
    return LogEntry(
        elem.id,
        PerturbationKind.POSITION_SHIFT,
        original=before,
        applied=geometry_payload(elem.position),
    )


def _color_snapshot(elem: Element) -> dict:
    return {
        "fill": fill_payload(elem.fill),
        "text_colors": [color_payload(r.color) for r in elem.text.runs]
        if elem.text is not None
        else None,
    }


def _apply_color_alteration(work, elem, rng, mag, used_ids) -> LogEntry:
    before = _color_snapshot(elem)
    if rng.random() < mag.color_default_reset_prob:
        for c in elem.fill.colors:
            c.rgb, c.alpha = mag.default_fill_rgb, 1.0
        if elem.text is not None:
            for r in elem.text.runs:
                r.color = Color(mag.default_text_rgb)
    else:
        rgb = _random_rgb(rng)
        for c in elem.fill.colors:
            c.rgb, c.alpha = rgb, 1.0
        if elem.text is not None and not elem.fill.colors:
            for r in elem.text.runs:
                r.color = Color(rgb)
    after = _color_snapshot(elem)
    if after == before:  # default reset hit an already-default element
        rgb = _random_rgb(rng)
        if elem.fill.colors and rgb == elem.fill.colors[0].rgb:
            rgb = f"{(int(rgb, 16) + 1) % (1 << 24):06X}"
        if elem.fill.colors:
            for c in elem.fill.colors:
                c.rgb = rgb
        elif elem.text is not None:
            for r in elem.text.runs:
                r.color = Color(rgb)
        after = _color_snapshot(elem)
    return LogEntry(
        elem.id, PerturbationKind.COLOR_ALTERATION, original=before, applied=after
    )


def _random_rgb(rng: random.Random) -> str:
    return f"{rng.randrange(1 << 24):06X}"


def _apply_text_reset(work, elem, rng, mag, used_ids) -> LogEntry:
    from .model import Alignment

    before = {"text": text_payload(elem.text)}
    font = rng.choice(mag.reset_fonts)
    if (
        all(r.font_name == font and r.font_size == mag.reset_font_size for r in elem.text.runs)
        and elem.text.alignment.value == mag.reset_alignment
    ):
        font = mag.reset_fonts[(mag.reset_fonts.index(font) + 1) % len(mag.reset_fonts)]
    for r in elem.text.runs:
        r.font_name = font
        r.font_size = mag.reset_font_size
    elem.text.alignment = Alignment(mag.reset_alignment)
    return LogEntry(
        elem.id,
        PerturbationKind.TEXT_ATTRIBUTE_RESET,
        original=before,
        applied={"text": text_payload(elem.text)},
    )


def _apply_fill_reset(work, elem, rng, mag, used_ids) -> LogEntry:
    before = {"fill": fill_payload(elem.fill)}
    elem.fill = Fill.solid(mag.default_fill_rgb)
    return LogEntry(
        elem.id,
        PerturbationKind.FILL_RESET,
        original=before,
        applied={"fill": fill_payload(elem.fill)},
    )


_APPLY = {
    PerturbationKind.SHAPE_REMOVAL: _apply_removal,
    PerturbationKind.SHAPE_DUPLICATION: _apply_duplication,
    PerturbationKind.POSITION_SHIFT: _apply_position_shift,
    PerturbationKind.COLOR_ALTERATION: _apply_color_alteration,
    PerturbationKind.TEXT_ATTRIBUTE_RESET: _apply_text_reset,
    PerturbationKind.FILL_RESET: _apply_fill_reset,
}


# --- reverse replay -----------------------------------------------------------


def replay_reverse(perturbed: SlideDoc, log: PerturbationLog) -> SlideDoc:
    """Undo every log entry in reverse order; reconstructs the original doc."""
    work = perturbed.clone()
    for entry in reversed(log.entries):
        kind = entry.kind
        if kind == PerturbationKind.SHAPE_REMOVAL:
            element = element_from_payload(entry.original["element"])
            work.elements.insert(entry.original["index"], element)
            continue
        if kind == PerturbationKind.SHAPE_DUPLICATION:
            work.elements = [e for e in work.elements if e.id != entry.element_id]
            continue
        elem = work.get(entry.element_id)
        if elem is None:
            raise ConsistencyError(
                f"log entry references missing element {entry.element_id}"
            )
        if kind == PerturbationKind.POSITION_SHIFT:
            elem.position = geometry_from_payload(entry.original)
        elif kind == PerturbationKind.COLOR_ALTERATION:
            elem.fill = fill_from_payload(entry.original["fill"])
            if entry.original["text_colors"] is not None:
                for r, cp in zip(elem.text.runs, entry.original["text_colors"]):
                    r.color = color_from_payload(cp)
        elif kind == PerturbationKind.TEXT_ATTRIBUTE_RESET:
            elem.text = text_from_payload(entry.original["text"])
        elif kind == PerturbationKind.FILL_RESET:
            elem.fill = fill_from_payload(entry.original["fill"])
    return work


# --- log (de)serialization ----------------------------------------------------


def log_payload(log: PerturbationLog) -> dict:
    return {
        "seed": log.seed,
        "severity": log.severity,
        "warnings": list(log.warnings),
        "entries": [
            {
                "element_id": e.element_id,
                "kind": e.kind.value,
                "category": CATEGORY_BY_KIND[e.kind],
                "original": e.original,
                "applied": e.applied,
            }
            for e in log.entries
        ],
    }


def log_from_payload(data: dict) -> PerturbationLog:
    return PerturbationLog(
        entries=[
            LogEntry(
                element_id=e["element_id"],
                kind=PerturbationKind(e["kind"]),
                original=e.get("original"),
                applied=e.get("applied"),
            )
            for e in data.get("entries", [])
        ],
        seed=data.get("seed", 0),
        severity=data.get("severity", 0.0),
        warnings=list(data.get("warnings", [])),
    )


# --- training pairs -----------------------------------------------------------


def _prompt(name: str) -> str:
    return resources.files("slideloop").joinpath("prompts", name).read_text("utf-8").strip()


REVIEWER_PROMPT = _prompt("reviewer.txt")
CONTRIBUTOR_PROMPT = _prompt("contributor.txt")


@dataclass
class ChatSample:
    system: str
    user: str
    assistant: str

    def payload(self) -> dict:
        return {"system": self.system, "user": self.user, "assistant": self.assistant}


@dataclass
class TrainingPair:
    reviewer_sample: ChatSample
    contributor_sample: ChatSample


def _training_pair_with_log(
    doc: SlideDoc, config: PerturbConfig
) -> tuple[TrainingPair, PerturbationLog]:
    original = clear_statuses(doc)
    perturbed, log = perturb(original, config)
    flagged = ground_truth_ids(log)

    draft_json = to_json(perturbed)
    labeled_json = to_json(with_statuses(perturbed, flagged))
    target_json = to_json(original)
    for text in (draft_json, labeled_json):
        tokens = estimate_token_length(text)
        if tokens > config.token_budget:
            raise BudgetError(
                f"slide {doc.source_id!r} serializes to {tokens} proxy tokens,"
                f" over the {config.token_budget} budget"
            )
    return (
        TrainingPair(
            reviewer_sample=ChatSample(REVIEWER_PROMPT, draft_json, labeled_json),
            contributor_sample=ChatSample(CONTRIBUTOR_PROMPT, labeled_json, target_json),
        ),
        log,
    )


def make_training_pair(doc: SlideDoc, config: PerturbConfig) -> TrainingPair:
    """One reviewer sample and one contributor sample for a finished slide.

    The reviewer learns draft -> draft-with-TENTATIVE-tags; the contributor
    learns tagged-draft -> original. Raises :class:`BudgetError` when a user
    message exceeds the proxy-token budget.
    """
    pair, _ = _training_pair_with_log(doc, config)
    return pair


def batch_generate(
    docs: Iterable[SlideDoc], config: PerturbConfig, out_path: str | Path
) -> dict:
    """Stream training pairs for a deck to a JSONL file.

    Each slide gets its own RNG stream (seed xor slide index) so results do
    not depend on how the batch is chunked. Per-slide failures are recorded
    in the manifest and do not abort the batch.
    """
    out_path = Path(out_path)
    per_kind = {k.value: 0 for k in ALL_KINDS}
    failures: list[dict] = []
    total = 0
    with out_path.open("w", encoding="utf-8") as fh:
        for index, doc in enumerate(docs):
            slide_config = replace(config, seed=config.seed ^ index)
            try:
                pair, log = _training_pair_with_log(doc, slide_config)
            except Exception as exc:  # record and continue
                failures.append(
                    {"index": index, "source_id": doc.source_id, "error": str(exc)}
                )
                continue
            for entry in log.entries:
                per_kind[entry.kind.value] += 1
            record = {
                "index": index,
                "source_id": doc.source_id,
                "seed": slide_config.seed,
                "reviewer": pair.reviewer_sample.payload(),
                "contributor": pair.contributor_sample.payload(),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            total += 1
    return {
        "total": total,
        "seed": config.seed,
        "severity": config.severity,
        "per_kind": per_kind,
        "failures": failures,
    }


__all__ = [
    "ALL_KINDS",
    "CATEGORIES",
    "CATEGORY_BY_KIND",
    "DEFAULT_FONTS",
    "ChatSample",
    "CONTRIBUTOR_PROMPT",
    "LogEntry",
    "MagnitudeTable",
    "PerturbConfig",
    "PerturbationKind",
    "PerturbationLog",
    "REVIEWER_PROMPT",
    "TrainingPair",
    "batch_generate",
    "ground_truth_ids",
    "log_from_payload",
    "log_payload",
    "make_training_pair",
    "perturb",
    "replay_reverse",
]
