"""Evaluation measurements: reviewer precision/recall per flaw category,
contributor responsiveness, and pairwise-judgement export.

Category ground truth comes from a perturbation log. Flagged elements with
no log entry are uncategorizable false positives; they are kept in one pool
that enters every category's precision denominator in full, and an overall
precision over the plain confusion matrix is reported alongside. Removed
elements cannot be flagged at all, so the shape-removal category is scored
over duplication entries only.

Fractions with an empty denominator are reported as ``None``, never 0.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConsistencyError
from .model import SlideDoc, Status, diff, tentative_ids
from .perturb import CATEGORIES, CATEGORY_BY_KIND, PerturbationKind, PerturbationLog
from .render import RenderOptions, render_svg


@dataclass
class CategoryScore:
    precision: float | None
    recall: float | None
    support: int


@dataclass
class MetricsReport:
    per_category: dict[str, CategoryScore]
    overall_precision: float | None
    overall_recall: float | None
    macro_precision: float | None
    macro_recall: float | None
    uncategorized_false_positives: int
    responsiveness: dict[str, float | None] = field(default_factory=dict)
    responsiveness_overall: float | None = None

    def payload(self) -> dict:
        return {
            "per_category": {
                name: {
                    "precision": score.precision,
                    "recall": score.recall,
                    "support": score.support,
                }
                for name, score in self.per_category.items()
            },
            "overall_precision": self.overall_precision,
            "overall_recall": self.overall_recall,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "uncategorized_false_positives": self.uncategorized_false_positives,
            "responsiveness": dict(self.responsiveness),
            "responsiveness_overall": self.responsiveness_overall,
        }


def _measurable_entries(log: PerturbationLog) -> dict[str, str]:
    """element id -> category, for entries a reviewer could possibly flag."""
    out: dict[str, str] = {}
    for e in log.entries:
        if e.kind == PerturbationKind.SHAPE_REMOVAL:
            continue
        out[e.element_id] = CATEGORY_BY_KIND[e.kind]
    return out


def _confusion_counts(labeled: SlideDoc, log: PerturbationLog) -> tuple[dict, dict, int]:
    """(true positives per category, support per category, false positives)."""
    entries = _measurable_entries(log)
    present = set(labeled.element_ids())
    missing = set(entries) - present
    if missing:
        raise ConsistencyError(
            f"log entries reference elements absent from the labeled doc: {sorted(missing)}"
        )
    ghosts = {
        e.element_id
        for e in log.entries
        if e.kind == PerturbationKind.SHAPE_REMOVAL
    } & present
    if ghosts:
        raise ConsistencyError(
            f"removal entries reference elements present in the labeled doc: {sorted(ghosts)}"
        )
    flagged = tentative_ids(labeled)
    tp = {c: 0 for c in CATEGORIES}
    support = {c: 0 for c in CATEGORIES}
    for eid, category in entries.items():
        support[category] += 1
        if eid in flagged:
            tp[category] += 1
    return tp, support, len(flagged - set(entries))


def _report_from_counts(tp: dict, support: dict, fp_total: int) -> MetricsReport:
    per_category: dict[str, CategoryScore] = {}
    for category in CATEGORIES:
        if support[category] == 0:
            per_category[category] = CategoryScore(None, None, 0)
            continue
        denom = tp[category] + fp_total
        per_category[category] = CategoryScore(
            precision=tp[category] / denom if denom > 0 else None,
            recall=tp[category] / support[category],
            support=support[category],
        )
    tp_total = sum(tp.values())
    support_total = sum(support.values())
    return MetricsReport(
        per_category=per_category,
        overall_precision=(
            tp_total / (tp_total + fp_total) if (tp_total + fp_total) > 0 else None
        ),
        overall_recall=tp_total / support_total if support_total > 0 else None,
        macro_precision=_macro([s.precision for s in per_category.values()]),
        macro_recall=_macro([s.recall for s in per_category.values()]),
        uncategorized_false_positives=fp_total,
    )


def reviewer_metrics(labeled: SlideDoc, log: PerturbationLog) -> MetricsReport:
    """Score a reviewer's TENTATIVE labels against the perturbation log."""
    tp, support, fp_total = _confusion_counts(labeled, log)
    return _report_from_counts(tp, support, fp_total)


def aggregate_reviewer_metrics(
    cases: list[tuple[SlideDoc, PerturbationLog]]
) -> MetricsReport:
    """Pool confusion counts over many (labeled doc, log) pairs before
    computing fractions, the way a whole evaluation set is scored."""
    tp = {c: 0 for c in CATEGORIES}
    support = {c: 0 for c in CATEGORIES}
    fp_total = 0
    for labeled, log in cases:
        case_tp, case_support, case_fp = _confusion_counts(labeled, log)
        for c in CATEGORIES:
            tp[c] += case_tp[c]
            support[c] += case_support[c]
        fp_total += case_fp
    return _report_from_counts(tp, support, fp_total)


def _macro(values: list[float | None]) -> float | None:
    known = [v for v in values if v is not None]
    return sum(known) / len(known) if known else None


def element_altered(labeled_in: SlideDoc, revised: SlideDoc, element_id: str) -> bool:
    """True when the contributor actually changed the element (status-only
    transitions do not count; disappearing counts)."""
    after = revised.get(element_id)
    if after is None:
        return True
    before = labeled_in.get(element_id)
    one = SlideDoc(labeled_in.canvas_width, labeled_in.canvas_height, [before], "")
    two = SlideDoc(labeled_in.canvas_width, labeled_in.canvas_height, [after], "")
    for entry in diff(one, two):
        if entry.change != "modified" or entry.id != element_id:
            continue
        if any(f != "status" for f in entry.fields):
            return True
    return False


def responsiveness(
    labeled_in: SlideDoc, revised: SlideDoc, log: PerturbationLog | None = None
) -> tuple[float | None, dict[str, float | None]]:
    """Fraction of TENTATIVE elements the contributor altered.

    Returns ``(overall, per_category)``; categories are resolved through the
    optional log, and elements flagged outside the log only contribute to
    the overall number. Each fraction is None when nothing was flagged in
    its bucket.
    """
    altered_n, flagged_n, altered_cat, flagged_cat = _responsiveness_counts(
        labeled_in, revised, log
    )
    overall = altered_n / flagged_n if flagged_n else None
    per_category = {
        c: (altered_cat[c] / flagged_cat[c] if flagged_cat[c] else None)
        for c in CATEGORIES
    }
    return overall, per_category


def _responsiveness_counts(labeled_in, revised, log):
    flagged = [e.id for e in labeled_in.elements if e.status == Status.TENTATIVE]
    altered = {eid: element_altered(labeled_in, revised, eid) for eid in flagged}
    altered_cat = {c: 0 for c in CATEGORIES}
    flagged_cat = {c: 0 for c in CATEGORIES}
    if log is not None:
        entries = _measurable_entries(log)
        for eid in flagged:
            category = entries.get(eid)
            if category is not None:
                flagged_cat[category] += 1
                if altered[eid]:
                    altered_cat[category] += 1
    return sum(1 for v in altered.values() if v), len(flagged), altered_cat, flagged_cat


def aggregate_responsiveness(
    cases: list[tuple[SlideDoc, SlideDoc, PerturbationLog | None]]
) -> tuple[float | None, dict[str, float | None]]:
    """Pooled responsiveness over (labeled, revised, log) triples."""
    total_altered = total_flagged = 0
    altered_cat = {c: 0 for c in CATEGORIES}
    flagged_cat = {c: 0 for c in CATEGORIES}
    for labeled_in, revised, log in cases:
        a, f, ac, fc = _responsiveness_counts(labeled_in, revised, log)
        total_altered += a
        total_flagged += f
        for c in CATEGORIES:
            altered_cat[c] += ac[c]
            flagged_cat[c] += fc[c]
    overall = total_altered / total_flagged if total_flagged else None
    per_category = {
        c: (altered_cat[c] / flagged_cat[c] if flagged_cat[c] else None)
        for c in CATEGORIES
    }
    return overall, per_category


def combined_report(
    labeled: SlideDoc,
    revised: SlideDoc,
    log: PerturbationLog,
) -> MetricsReport:
    report = reviewer_metrics(labeled, log)
    overall, per_category = responsiveness(labeled, revised, log)
    report.responsiveness = per_category
    report.responsiveness_overall = overall
    return report


def format_report_table(report: MetricsReport) -> str:
    """Plain-text table in the usual flaw-category layout."""
    rows = [
        f"{'Design flaws':<18} {'Precision':>9} {'Recall':>7} {'Support':>8} {'Responsiveness':>15}"
    ]
    for category in CATEGORIES:
        score = report.per_category[category]
        resp = report.responsiveness.get(category)
        rows.append(
            f"{category:<18} {_fmt(score.precision):>9} {_fmt(score.recall):>7}"
            f" {score.support:>8} {_fmt(resp):>15}"
        )
    rows.append(
        f"{'overall':<18} {_fmt(report.overall_precision):>9}"
        f" {_fmt(report.overall_recall):>7} {'-':>8}"
        f" {_fmt(report.responsiveness_overall):>15}"
    )
    return "\n".join(rows)


def _fmt(v: float | None) -> str:
    return "null" if v is None else f"{v:.3f}"


# --- pairwise judgement bundles ------------------------------------------------


JUDGE_PROMPT = (
    resources.files("slideloop").joinpath("prompts", "judge.txt").read_text("utf-8").strip()
)


@dataclass
class JudgementBundle:
    bundle_id: str
    directory: Path
    mapping: dict  # blind label -> "ours" | "baseline"
    prompt: str


def export_judgement(
    draft: SlideDoc,
    ours: SlideDoc,
    baseline: SlideDoc,
    seed: int,
    out_dir: str | Path,
    options: RenderOptions | None = None,
) -> JudgementBundle:
    """Write a blinded compare-two-candidates bundle: three renders, the
    judge prompt and the label mapping. Blinding is deterministic in seed."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    options = options or RenderOptions()
    rng = random.Random(seed)
    swap = rng.random() < 0.5
    mapping = {"A": "baseline", "B": "ours"} if swap else {"A": "ours", "B": "baseline"}
    by_side = {"ours": ours, "baseline": baseline}

    bundle_id = f"bundle-{seed:08d}"
    (out_dir / "draft.svg").write_text(render_svg(draft, options), encoding="utf-8")
    (out_dir / "candidate_a.svg").write_text(
        render_svg(by_side[mapping["A"]], options), encoding="utf-8"
    )
    (out_dir / "candidate_b.svg").write_text(
        render_svg(by_side[mapping["B"]], options), encoding="utf-8"
    )
    (out_dir / "prompt.txt").write_text(JUDGE_PROMPT + "\n", encoding="utf-8")
    mapping_payload = {"bundle_id": bundle_id, "seed": seed, "mapping": mapping}
    (out_dir / "mapping.json").write_text(
        json.dumps(mapping_payload, indent=2) + "\n", encoding="utf-8"
    )
    return JudgementBundle(
        bundle_id=bundle_id, directory=out_dir, mapping=mapping, prompt=JUDGE_PROMPT
    )


def win_rate(verdicts: list[dict], mappings: dict[str, dict]) -> dict[str, float]:
    """Unblind verdict records ({bundle_id, verdict: A|B|tie}) and aggregate.

    ``mappings`` maps bundle id to its blind-label mapping. Fractions sum
    to 1 over {ours, baseline, tie}.
    """
    counts = {"ours": 0, "baseline": 0, "tie": 0}
    for record in verdicts:
        bundle_id = record["bundle_id"]
        verdict = record["verdict"]
        if bundle_id not in mappings:
            raise ConsistencyError(f"unknown bundle id {bundle_id!r}")
        if verdict == "tie":
            counts["tie"] += 1
        elif verdict in ("A", "B"):
            counts[mappings[bundle_id]["mapping"][verdict]] += 1
        else:
            raise ConsistencyError(f"unknown verdict {verdict!r}")
    total = sum(counts.values())
    if total == 0:
        raise ConsistencyError("no verdicts given")
    return {side: counts[side] / total for side in ("ours", "baseline", "tie")}


__all__ = [
    "CategoryScore",
    "JUDGE_PROMPT",
    "JudgementBundle",
    "MetricsReport",
    "aggregate_responsiveness",
    "aggregate_reviewer_metrics",
    "combined_report",
    "element_altered",
    "export_judgement",
    "format_report_table",
    "responsiveness",
    "reviewer_metrics",
    "win_rate",
]
