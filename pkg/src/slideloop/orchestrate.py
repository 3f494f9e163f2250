"""Iterative refinement loop, branching and interactive labeling.

The loop alternates contributor and reviewer passes: optionally start by
handing the contributor the whole slide marked TENTATIVE, then review,
fix whatever gets flagged, and repeat until a review comes back clean
(early stop) or the contributor-call budget is exhausted.

Iteration counting: every contributor pass is an iteration, and the clean
review that ends a converged run counts as its final iteration (a run that
converges immediately, with no contributor pass, used zero iterations).
The trace keeps one snapshot per iteration, so a converged run's last two
snapshots are identical: the state the clean review confirmed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import doc_from_payload, doc_payload
from .errors import BackendError, SlideloopError, UnknownElementError
from .model import SlideDoc, mark_all_tentative, tentative_ids, with_statuses
from .roles import Contributor, Reviewer

STOP_CONVERGED = "converged"
STOP_MAX_ITERATIONS = "max_iterations"
STOP_BACKEND_ERROR = "backend_error"


@dataclass(frozen=True)
class RefineOptions:
    max_iterations: int = 5  # bound on contributor calls
    early_stop: bool = True
    initial_all_tentative: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class RefinementTrace:
    snapshots: list[SlideDoc]
    flagged_sets: list[set[str]]
    stop_reason: str
    iterations_used: int
    error: str | None = None

    def converged(self) -> bool:
        return self.stop_reason == STOP_CONVERGED

    def final_doc(self) -> SlideDoc:
        return self.snapshots[-1]


def trace_payload(trace: RefinementTrace, options: RefineOptions | None = None) -> dict:
    out: dict = {}
    if options is not None:
        out["options"] = {
            "max_iterations": options.max_iterations,
            "early_stop": options.early_stop,
            "initial_all_tentative": options.initial_all_tentative,
        }
    out.update(
        {
            "snapshots": [doc_payload(s) for s in trace.snapshots],
            "flagged_sets": [sorted(s) for s in trace.flagged_sets],
            "stop_reason": trace.stop_reason,
            "iterations_used": trace.iterations_used,
            "error": trace.error,
        }
    )
    return out


def trace_from_payload(data: dict) -> RefinementTrace:
    return RefinementTrace(
        snapshots=[doc_from_payload(p, tolerant=True) for p in data["snapshots"]],
        flagged_sets=[set(s) for s in data["flagged_sets"]],
        stop_reason=data["stop_reason"],
        iterations_used=data["iterations_used"],
        error=data.get("error"),
    )


def refine(
    doc: SlideDoc,
    reviewer: Reviewer,
    contributor: Contributor,
    options: RefineOptions | None = None,
) -> RefinementTrace:
    """Run the refinement loop; never raises for backend failures, the trace
    carries them (stop_reason ``backend_error``, last good snapshot kept)."""
    options = options or RefineOptions()
    snapshots: list[SlideDoc] = [doc]
    flagged_sets: list[set[str]] = []
    current = doc
    passes = 0
    error: str | None = None
    stop = None

    try:
        if options.initial_all_tentative:
            current = contributor.contribute(mark_all_tentative(current))
            passes += 1
            snapshots.append(current)
        while True:
            labeled = reviewer.review(current)
            flags = tentative_ids(labeled)
            flagged_sets.append(flags)
            if not flags and (options.early_stop or passes >= options.max_iterations):
                stop = STOP_CONVERGED
                break
            if passes >= options.max_iterations:
                stop = STOP_MAX_ITERATIONS
                break
            current = contributor.contribute(labeled)
            passes += 1
            snapshots.append(current)
    except (BackendError, SlideloopError) as exc:
        error = str(exc)
        # A clean review followed by a failed (no-op) pass still converged;
        # anything else is a truncated run with the last good snapshot kept.
        if flagged_sets and not flagged_sets[-1]:
            stop = STOP_CONVERGED
        else:
            stop = STOP_BACKEND_ERROR

    iterations = passes
    if stop == STOP_CONVERGED and passes >= 1:
        # the terminal clean review is the last iteration; its state equals
        # the last contributor output
        snapshots.append(current)
        iterations += 1
    return RefinementTrace(
        snapshots=snapshots,
        flagged_sets=flagged_sets,
        stop_reason=stop,
        iterations_used=iterations,
        error=error,
    )


@dataclass
class Branch:
    branch_id: str
    doc: SlideDoc
    trace: RefinementTrace


@dataclass
class BranchSet:
    parent: SlideDoc
    branches: list[Branch] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def get(self, branch_id: str) -> Branch | None:
        for b in self.branches:
            if b.branch_id == branch_id:
                return b
        return None


def branch(doc: SlideDoc, contributor: Contributor, n: int, seed: int = 0) -> BranchSet:
    """Produce ``n`` independent single-pass design suggestions from one
    parent by varying the contributor (palette/grid variants for the
    heuristic backend, sampling seeds for remote ones). Branch 0 always uses
    the unvaried backend, so it matches a plain refinement's first pass."""
    if n < 1:
        raise ValueError("branch count must be >= 1")
    out = BranchSet(parent=doc)
    all_ids = frozenset(doc.element_ids())
    labeled = with_statuses(doc, all_ids)
    for index in range(n):
        try:
            variant = contributor.variant(index, seed)
            result = variant.contribute(labeled)
        except SlideloopError as exc:
            out.errors.append({"branch_id": f"b{index}", "error": str(exc)})
            continue
        trace = RefinementTrace(
            snapshots=[doc, result],
            flagged_sets=[set(all_ids)],
            stop_reason=STOP_MAX_ITERATIONS,
            iterations_used=1,
        )
        out.branches.append(Branch(branch_id=f"b{index}", doc=result, trace=trace))
    if not out.branches:
        raise BackendError(
            f"all {n} branches failed: {out.errors}", raw_response=None
        )
    return out


def apply_user_labels(doc: SlideDoc, element_ids: list[str] | set[str]) -> SlideDoc:
    """Mark exactly the given elements TENTATIVE (the human-reviewer path)."""
    wanted = set(element_ids)
    known = set(doc.element_ids())
    missing = wanted - known
    if missing:
        raise UnknownElementError(missing)
    return with_statuses(doc, wanted)


def convergence_histogram(traces: list[RefinementTrace]) -> dict:
    """Distribution of converged runs over iterations used; non-converged
    runs are counted separately, not binned."""
    if not traces:
        raise ValueError("no traces given")
    histogram: dict[int, int] = {}
    non_converged = 0
    for t in traces:
        if t.converged():
            histogram[t.iterations_used] = histogram.get(t.iterations_used, 0) + 1
        else:
            non_converged += 1
    return {
        "histogram": dict(sorted(histogram.items())),
        "non_converged": non_converged,
        "total": len(traces),
    }


__all__ = [
    "Branch",
    "BranchSet",
    "RefineOptions",
    "RefinementTrace",
    "STOP_BACKEND_ERROR",
    "STOP_CONVERGED",
    "STOP_MAX_ITERATIONS",
    "apply_user_labels",
    "branch",
    "convergence_histogram",
    "refine",
    "trace_from_payload",
    "trace_payload",
]
