"""Reviewer and contributor role backends.

Both roles run against one of three interchangeable backends:

* oracle    — exact semantics derived from a perturbation log / the original
              document; used for testing and metric calibration.
* heuristic — deterministic rules; a usable offline system.
* remote    — a fine-tuned model behind a chat-completions-shaped HTTP
              endpoint, with prompt formatting, response repair and retries.

Contracts: a reviewer returns the same elements in the same order and may
only set statuses; a contributor returns a document with every status
FINAL, touching only the elements that were TENTATIVE (hard guarantee for
oracle/heuristic, measured expectation for remote).
"""

from __future__ import annotations

import copy
import threading
from dataclasses import dataclass

import httpx

from .codec import (
    TOKEN_BUDGET,
    color_from_payload,
    estimate_token_length,
    fill_from_payload,
    from_json,
    geometry_from_payload,
    text_from_payload,
    to_json,
)
from .errors import BackendError, BudgetError, IrreparableResponseError, SlideloopError
from .heuristics import (
    HeuristicConfig,
    beyond_canvas,
    dominant_font,
    dominant_lines,
    edge_value,
    fill_palette,
    has_non_default_palette,
    heuristic_flags,
    is_black_on_white,
    near_duplicate_of_any,
    nearest_near_miss,
    on_any_line,
)
from .model import (
    Color,
    Element,
    Fill,
    FillMode,
    SlideDoc,
    Status,
    clear_statuses,
    tentative_ids,
    with_statuses,
)
from .perturb import (
    CONTRIBUTOR_PROMPT,
    REVIEWER_PROMPT,
    PerturbationKind,
    PerturbationLog,
)


class Reviewer:
    """Base reviewer: computes a flag set and applies it as statuses."""

    name = "reviewer"

    def review(self, doc: SlideDoc) -> SlideDoc:
        # Incoming statuses are ignored; each review starts from FINAL.
        base = clear_statuses(doc)
        return with_statuses(base, self.flag_ids(base))

    def flag_ids(self, doc: SlideDoc) -> set[str]:
        raise NotImplementedError


class Contributor:
    name = "contributor"

    def contribute(self, doc: SlideDoc) -> SlideDoc:
        raise NotImplementedError

    def variant(self, index: int, seed: int) -> "Contributor":
        """Backend used for branch ``index``; index 0 is this backend."""
        return self


# --- oracle backends ---------------------------------------------------------


class OracleReviewer(Reviewer):
    """Flags exactly the logged perturbations that are still present.

    Removal entries flag nothing (the element is absent); a duplication is
    flagged while the duplicate exists; value perturbations are flagged while
    the element still differs from its logged original snapshot.
    """

    name = "oracle-reviewer"

    def __init__(self, log: PerturbationLog):
        self.log = log

    def flag_ids(self, doc: SlideDoc) -> set[str]:
        flags: set[str] = set()
        for entry in self.log.entries:
            if entry.kind == PerturbationKind.SHAPE_REMOVAL:
                continue
            elem = doc.get(entry.element_id)
            if elem is None:
                continue
            if entry.kind == PerturbationKind.SHAPE_DUPLICATION:
                flags.add(entry.element_id)
            elif _still_perturbed(elem, entry):
                flags.add(entry.element_id)
        return flags


def _still_perturbed(elem: Element, entry) -> bool:
    kind = entry.kind
    if kind == PerturbationKind.POSITION_SHIFT:
        return elem.position != geometry_from_payload(entry.original)
    if kind == PerturbationKind.FILL_RESET:
        return elem.fill != fill_from_payload(entry.original["fill"])
    if kind == PerturbationKind.TEXT_ATTRIBUTE_RESET:
        if elem.text is None:
            return True
        return elem.text != text_from_payload(entry.original["text"])
    if kind == PerturbationKind.COLOR_ALTERATION:
        if elem.fill != fill_from_payload(entry.original["fill"]):
            return True
        snap = entry.original["text_colors"]
        if snap is None:
            return False
        if elem.text is None or len(elem.text.runs) != len(snap):
            return True
        return any(
            r.color != color_from_payload(cp) for r, cp in zip(elem.text.runs, snap)
        )
    return False


class OracleContributor(Contributor):
    """Restores flagged elements to their values in the original document,
    drops flagged elements that never existed there, and re-inserts any
    element missing from the draft at its original z position."""

    name = "oracle-contributor"

    def __init__(self, original: SlideDoc):
        self.original = clear_statuses(original)

    def contribute(self, doc: SlideDoc) -> SlideDoc:
        orig_by_id = {e.id: e for e in self.original.elements}
        out: list[Element] = []
        for e in doc.elements:
            if e.status == Status.TENTATIVE:
                if e.id in orig_by_id:
                    out.append(copy.deepcopy(orig_by_id[e.id]))
                # flagged element unknown to the original: an extra copy, drop it
            else:
                kept = copy.deepcopy(e)
                kept.status = Status.FINAL
                out.append(kept)
        present = {e.id for e in out}
        for index, e in enumerate(self.original.elements):
            if e.id not in present:
                out.insert(min(index, len(out)), copy.deepcopy(e))
        return SlideDoc(
            canvas_width=doc.canvas_width,
            canvas_height=doc.canvas_height,
            elements=out,
            source_id=doc.source_id,
        )


# --- heuristic backends --------------------------------------------------------


class HeuristicReviewer(Reviewer):
    name = "heuristic-reviewer"

    def __init__(self, config: HeuristicConfig | None = None):
        self.config = config or HeuristicConfig()

    def flag_ids(self, doc: SlideDoc) -> set[str]:
        return heuristic_flags(doc, self.config)


GRID_VARIANTS = (8, 12, 16, 6, 10)
HOUSE_FONT_VARIANTS = ("Georgia", "Palatino", "Verdana", "Garamond")


@dataclass(frozen=True)
class StyleVariant:
    """Knobs that differentiate branch candidates; the default variant is
    what a plain refinement run uses."""

    palette_rotation: int = 0
    grid_columns: int = 8
    house_font: str = HOUSE_FONT_VARIANTS[0]
    house_fill: str = "4472C4"

    @classmethod
    def for_branch(cls, index: int) -> "StyleVariant":
        return cls(
            palette_rotation=index,
            grid_columns=GRID_VARIANTS[index % len(GRID_VARIANTS)],
            house_font=HOUSE_FONT_VARIANTS[index % len(HOUSE_FONT_VARIANTS)],
        )


class HeuristicContributor(Contributor):
    """Fixes flagged elements with deterministic design moves: drop extra
    near-duplicates, clamp into the canvas, snap edges to dominant alignment
    lines (falling back to a column grid), recolor defaults from the slide
    palette, and replace default fonts with the slide's dominant font."""

    name = "heuristic-contributor"

    def __init__(
        self,
        config: HeuristicConfig | None = None,
        style: StyleVariant | None = None,
    ):
        self.config = config or HeuristicConfig()
        self.style = style or StyleVariant()

    def variant(self, index: int, seed: int) -> "HeuristicContributor":
        if index == 0:
            return self
        return HeuristicContributor(self.config, StyleVariant.for_branch(index))

    def contribute(self, doc: SlideDoc) -> SlideDoc:
        work = doc.clone()
        style_palette = fill_palette(work)  # snapshot before any fix shifts counts
        for eid in [e.id for e in work.elements if e.status == Status.TENTATIVE]:
            elem = work.get(eid)
            if elem is None:
                continue
            if near_duplicate_of_any(work, elem, self.config):
                work.elements.remove(elem)
                continue
            self._fix_geometry(work, elem)
            self._fix_colors(work, elem, style_palette)
            self._fix_fonts(work, elem)
        for e in work.elements:
            e.status = Status.FINAL
        return work

    # geometry -----------------------------------------------------------

    def _fix_geometry(self, doc: SlideDoc, elem: Element) -> None:
        g = elem.position
        if beyond_canvas(elem, doc):
            g.width = min(g.width, doc.canvas_width)
            g.height = min(g.height, doc.canvas_height)
            g.x = min(max(g.x, 0), doc.canvas_width - g.width)
            g.y = min(max(g.y, 0), doc.canvas_height - g.height)
        tol = self.config.line_tol_frac * doc.canvas_width
        near = self.config.near_tol_frac * doc.canvas_width
        self._snap_axis(doc, elem, "left", "right", tol, near, grid=True)
        self._snap_axis(doc, elem, "top", "bottom", tol, near, grid=False)

    def _snap_axis(
        self,
        doc: SlideDoc,
        elem: Element,
        low_fam: str,
        high_fam: str,
        tol: float,
        near: float,
        grid: bool,
    ) -> None:
        g = elem.position
        dim = doc.canvas_width if low_fam == "left" else doc.canvas_height
        low_lines = dominant_lines(doc, low_fam, tol)
        high_lines = dominant_lines(doc, high_fam, tol)
        low = edge_value(g, low_fam)
        high = edge_value(g, high_fam)
        size = high - low
        low_on = on_any_line(low, low_lines, tol)
        high_on = on_any_line(high, high_lines, tol)
        # Snap targets must keep the element inside the canvas; off-canvas
        # elements can form dominant lines of their own and those must never
        # pull a clamped element back out.
        low_near = nearest_near_miss(
            low, [v for v in low_lines if 0 <= v <= dim - size], tol, near
        )
        high_near = nearest_near_miss(
            high, [v for v in high_lines if size <= v <= dim], tol, near
        )

        new_low, new_size = low, size
        if low_on and size > 0:
            target = nearest_near_miss(
                high, [v for v in high_lines if low < v <= dim], tol, near
            )
            if target is not None:
                new_size = target - low  # keep the aligned edge, resize to the line
            elif not grid and high_near is not None:
                new_low = high_near - size  # gridless axis: settle for a translate
        elif high_on and size > 0:
            target = nearest_near_miss(
                low, [v for v in low_lines if 0 <= v < high], tol, near
            )
            if target is not None:
                new_low, new_size = target, high - target
        elif low_near is not None:
            new_low = low_near
        elif high_near is not None:
            new_low = high_near - size
        elif grid and not low_on:
            new_low = self._grid_snap(low, size, dim, low_lines, tol, near)
        if low_fam == "left":
            g.x, g.width = new_low, new_size
        else:
            g.y, g.height = new_low, new_size

    def _grid_snap(
        self, value: int, size: int, dim: int, lines: list[int], tol: float, near: float
    ) -> int:
        cols = self.style.grid_columns
        k = min(cols, max(0, round(value * cols / dim)))
        snapped = max(0, min(round(k * dim / cols), dim - size))
        # Landing next to (but not on) a dominant line would re-trip the
        # misalignment rule, so prefer the line itself in that case.
        near_line = nearest_near_miss(
            snapped, [v for v in lines if 0 <= v <= dim - size], tol, near
        )
        return near_line if near_line is not None else snapped

    # colors ----------------------------------------------------------------

    def _fix_colors(self, doc: SlideDoc, elem: Element, style_palette: list[str]) -> None:
        if is_black_on_white(elem):
            if not has_non_default_palette(doc, exclude_id=elem.id):
                return
            palette = fill_palette(doc, exclude_id=elem.id)
            if palette:
                rotation = self.style.palette_rotation % len(palette)
                target = palette[rotation]
            else:
                target = self.style.house_fill
            elem.fill = Fill(FillMode.SOLID, [Color(target)])
            return
        # branch variants restyle flagged palette colors by rotating hues
        rotation = self.style.palette_rotation
        if (
            rotation
            and len(style_palette) >= 2
            and elem.fill.mode == FillMode.SOLID
            and elem.fill.colors
            and elem.fill.colors[0].rgb in style_palette
        ):
            idx = style_palette.index(elem.fill.colors[0].rgb)
            elem.fill.colors[0].rgb = style_palette[(idx + rotation) % len(style_palette)]

    # fonts -------------------------------------------------------------------

    def _fix_fonts(self, doc: SlideDoc, elem: Element) -> None:
        if elem.text is None:
            return
        if not any(r.font_name in self.config.default_fonts for r in elem.text.runs):
            return
        target = dominant_font(doc, self.config.default_fonts, exclude_id=elem.id)
        if target is None:
            target = self.style.house_font
        for r in elem.text.runs:
            if r.font_name in self.config.default_fonts:
                r.font_name = target


# --- remote backends -----------------------------------------------------------


@dataclass(frozen=True)
class RemoteModelConfig:
    """Chat-completions-shaped endpoint configuration.

    ``max_tokens`` may not exceed the serialization budget the wire format
    is sized for.
    """

    endpoint: str
    model: str
    temperature: float = 0.2
    max_tokens: int = TOKEN_BUDGET
    max_attempts: int = 2
    timeout: float = 60.0
    api_key: str | None = None
    max_in_flight: int = 4
    reviewer_prompt: str = REVIEWER_PROMPT
    contributor_prompt: str = CONTRIBUTOR_PROMPT
    token_budget: int = TOKEN_BUDGET

    def __post_init__(self):
        if self.max_tokens > self.token_budget:
            raise ValueError(
                f"max_tokens {self.max_tokens} exceeds the {self.token_budget} budget"
            )
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def format_prompt(role: str, doc: SlideDoc, config: RemoteModelConfig | None = None) -> list[dict]:
    """Chat messages for one role call; rejects over-budget documents."""
    if role == "reviewer":
        system = config.reviewer_prompt if config else REVIEWER_PROMPT
    elif role == "contributor":
        system = config.contributor_prompt if config else CONTRIBUTOR_PROMPT
    else:
        raise ValueError(f"unknown role {role!r}")
    body = to_json(doc)
    budget = config.token_budget if config else TOKEN_BUDGET
    tokens = estimate_token_length(body)
    if tokens > budget:
        raise BudgetError(
            f"slide {doc.source_id!r} serializes to {tokens} proxy tokens,"
            f" over the {budget} budget"
        )
    return [
        {"role": "system", "content": system},
        {"role": "user", "content": body},
    ]


def parse_response(role: str, text: str) -> SlideDoc:
    """Parse a model response into a document.

    Applies a bounded repair pass first: strip any prose or code fencing
    around the JSON object by extracting the first balanced ``{...}`` span.
    A response with no balanced object (e.g. truncated output) is an
    irreparable error; there is no silent fallback.
    """
    try:
        return from_json(text, tolerant=True)
    except SlideloopError:
        pass
    span = _balanced_object_span(text)
    if span is None:
        raise IrreparableResponseError(
            f"{role} response contains no balanced JSON object", raw_response=text
        )
    try:
        return from_json(text[span[0] : span[1]], tolerant=True)
    except SlideloopError as exc:
        raise IrreparableResponseError(
            f"{role} response not repairable: {exc}", raw_response=text
        )


def _balanced_object_span(text: str) -> tuple[int, int] | None:
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    in_str = esc = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return (start, i + 1)
    return None


def http_chat_transport(config: RemoteModelConfig):
    """Default transport: POST {model, messages, temperature, max_tokens} and
    return the first choice's message content."""

    def send(messages: list[dict], temperature: float, seed: int | None) -> str:
        payload: dict = {
            "model": config.model,
            "messages": messages,
            "temperature": temperature,
            "max_tokens": config.max_tokens,
        }
        if seed is not None:
            payload["seed"] = seed
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        response = httpx.post(
            config.endpoint, json=payload, headers=headers, timeout=config.timeout
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]

    return send


class _RemoteBackend:
    def __init__(self, config: RemoteModelConfig, transport=None):
        self.config = config
        self.transport = transport or http_chat_transport(config)
        self._gate = threading.Semaphore(config.max_in_flight)

    def _call(self, role: str, doc: SlideDoc, check, temperature=None, seed=None):
        messages = format_prompt(role, doc, self.config)
        temp = self.config.temperature if temperature is None else temperature
        last_error: Exception | None = None
        raw: str | None = None
        for _ in range(self.config.max_attempts):
            try:
                with self._gate:
                    raw = self.transport(messages, temp, seed)
                parsed = parse_response(role, raw)
                return check(parsed)
            except (httpx.HTTPError, SlideloopError, KeyError) as exc:
                last_error = exc
        raise BackendError(
            f"{role} backend failed after {self.config.max_attempts} attempts: {last_error}",
            raw_response=raw,
        )


class RemoteReviewer(Reviewer, _RemoteBackend):
    name = "remote-reviewer"

    def __init__(self, config: RemoteModelConfig, transport=None):
        _RemoteBackend.__init__(self, config, transport)

    def review(self, doc: SlideDoc) -> SlideDoc:
        base = clear_statuses(doc)

        def check(parsed: SlideDoc) -> SlideDoc:
            if clear_statuses(parsed) != base:
                raise BackendError(
                    "reviewer response changed more than statuses"
                )
            # rebuild on the input so the status-only contract holds exactly
            return with_statuses(base, tentative_ids(parsed))

        return self._call("reviewer", base, check)

    def flag_ids(self, doc: SlideDoc) -> set[str]:
        return tentative_ids(self.review(doc))


class RemoteContributor(Contributor, _RemoteBackend):
    name = "remote-contributor"

    def __init__(
        self,
        config: RemoteModelConfig,
        transport=None,
        sampling_seed: int | None = None,
        temperature: float | None = None,
    ):
        _RemoteBackend.__init__(self, config, transport)
        self.sampling_seed = sampling_seed
        self.temperature = temperature

    def variant(self, index: int, seed: int) -> "RemoteContributor":
        return RemoteContributor(
            self.config,
            transport=self.transport,
            sampling_seed=seed + index,
            temperature=self.temperature,
        )

    def contribute(self, doc: SlideDoc) -> SlideDoc:
        def check(parsed: SlideDoc) -> SlideDoc:
            return clear_statuses(parsed)  # contributor output is always all-FINAL

        return self._call(
            "contributor",
            doc,
            check,
            temperature=self.temperature,
            seed=self.sampling_seed,
        )


__all__ = [
    "Contributor",
    "GRID_VARIANTS",
    "HeuristicContributor",
    "HeuristicReviewer",
    "OracleContributor",
    "OracleReviewer",
    "RemoteContributor",
    "RemoteModelConfig",
    "RemoteReviewer",
    "Reviewer",
    "StyleVariant",
    "format_prompt",
    "http_chat_transport",
    "parse_response",
]
