"""Command-line interface: thin wrappers over the package operations.

Every command exits non-zero on failure and prints a machine-readable
JSON error object to stderr: ``{"error": {"kind": ..., "message": ...}}``.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import __version__
from .codec import doc_from_payload, doc_payload, estimate_token_length, to_json
from .config import build_backends, load_config, perturb_config
from .errors import SlideloopError
from .metrics import combined_report, export_judgement, format_report_table, win_rate
from .model import SlideDoc, with_statuses
from .orchestrate import RefineOptions, branch as make_branches, refine, trace_payload, trace_from_payload
from .perturb import batch_generate, log_from_payload, log_payload, perturb
from .pptx import Deck, deck_from_json, deck_to_json, export_pptx, load_pptx
from .render import RenderOptions, render_svg
from .roles import OracleContributor, OracleReviewer

JSON_KW = {"indent": 2, "ensure_ascii": False}


def _fail(exc: SlideloopError) -> None:
    sys.stderr.write(json.dumps({"error": exc.payload()}) + "\n")
    sys.exit(2)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SlideloopError as exc:
            _fail(exc)

    return wrapper


def _load_deck(path: str) -> Deck:
    text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    if isinstance(data, dict) and "slides" in data:
        return deck_from_json(text, tolerant=True)
    doc = doc_from_payload(data, tolerant=True)
    return Deck.of([doc])


def _slide(deck: Deck, index: int) -> SlideDoc:
    if not 0 <= index < len(deck.slides):
        raise click.ClickException(
            f"slide index {index} out of range 0..{len(deck.slides) - 1}"
        )
    return deck.slides[index]


def _load_logs(path: str) -> list:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict) and "slides" in data:
        return [log_from_payload(p) for p in data["slides"]]
    return [log_from_payload(data)]


def _pick_log(logs: list, slide_index: int):
    if len(logs) == 1:
        return logs[0]  # single-slide log file
    if not 0 <= slide_index < len(logs):
        raise click.ClickException(
            f"log file holds {len(logs)} slides, index {slide_index} out of range"
        )
    return logs[slide_index]


@click.group()
@click.version_option(__version__)
def main():
    """Slide-design refinement pipeline."""


@main.command()
@click.argument("pptx_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@handle_errors
def ingest(pptx_path, out, report_path):
    """Convert a .pptx file into a deck JSON document."""
    deck, report = load_pptx(Path(pptx_path).read_bytes())
    Path(out).write_text(deck_to_json(deck), encoding="utf-8")
    if report_path:
        Path(report_path).write_text(
            json.dumps(report.payload(), **JSON_KW), encoding="utf-8"
        )
    click.echo(
        f"ingested {len(deck.slides)} slides, {report.parsed_elements} elements,"
        f" {len(report.skipped)} skipped"
    )


@main.command()
@click.argument("deck_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@handle_errors
def export(deck_path, out):
    """Write a deck JSON document back to .pptx."""
    deck = _load_deck(deck_path)
    Path(out).write_bytes(export_pptx(deck))
    click.echo(f"wrote {out} ({len(deck.slides)} slides)")


@main.command("perturb")
@click.argument("deck_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--severity", type=float, default=None)
@click.option("--kinds", type=str, default=None, help="comma-separated kind names")
@click.option("--slide", "slide_index", type=int, default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--log", "log_path", required=True, type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True))
@handle_errors
def perturb_cmd(deck_path, seed, severity, kinds, slide_index, out, log_path, config_path):
    """Simulate rough drafts by perturbing finished slides."""
    config = perturb_config(load_config(config_path), seed, severity, kinds)
    deck = _load_deck(deck_path)
    slides = deck.slides if slide_index is None else [_slide(deck, slide_index)]
    perturbed, logs = [], []
    for i, doc in enumerate(slides):
        import dataclasses

        slide_config = dataclasses.replace(config, seed=config.seed ^ i)
        p, log = perturb(doc, slide_config)
        perturbed.append(p)
        logs.append(log)
    Path(out).write_text(deck_to_json(Deck.of(perturbed, deck.metadata.title)), "utf-8")
    Path(log_path).write_text(
        json.dumps({"slides": [log_payload(l) for l in logs]}, **JSON_KW), "utf-8"
    )
    click.echo(
        f"perturbed {len(perturbed)} slides,"
        f" {sum(len(l.entries) for l in logs)} perturbations"
    )


@main.command("dataset-gen")
@click.argument("deck_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--severity", type=float, default=None)
@click.option("--kinds", type=str, default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True))
@handle_errors
def dataset_gen(deck_path, seed, severity, kinds, out, manifest_path, config_path):
    """Generate reviewer/contributor training pairs as JSONL."""
    config = perturb_config(load_config(config_path), seed, severity, kinds)
    deck = _load_deck(deck_path)
    manifest = batch_generate(deck.slides, config, out)
    Path(manifest_path).write_text(json.dumps(manifest, **JSON_KW), encoding="utf-8")
    click.echo(f"wrote {manifest['total']} pairs to {out}")


def _backends(backend, config_path, log_path, original_path, slide_index):
    data = load_config(config_path)
    if backend == "oracle":
        if not log_path or not original_path:
            raise click.ClickException("--backend oracle needs --log and --original")
        logs = _load_logs(log_path)
        log = _pick_log(logs, slide_index)
        original = _slide(_load_deck(original_path), slide_index)
        return OracleReviewer(log), OracleContributor(original)
    return build_backends(backend, data)


@main.command()
@click.argument("deck_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--slide", "slide_index", type=int, default=0)
@click.option("--backend", type=click.Choice(["heuristic", "remote", "oracle"]), default="heuristic")
@click.option("--max-iter", type=int, default=5)
@click.option("--early-stop/--no-early-stop", default=True)
@click.option("--initial-tentative/--no-initial-tentative", default=True)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--log", "log_path", type=click.Path(exists=True), help="perturbation log (oracle)")
@click.option("--original", "original_path", type=click.Path(exists=True), help="original deck (oracle)")
@click.option("--config", "config_path", type=click.Path(exists=True))
@handle_errors
def refine_cmd(deck_path, slide_index, backend, max_iter, early_stop, initial_tentative,
               trace_path, out, log_path, original_path, config_path):
    """Run the iterative review/contribute loop on one slide."""
    deck = _load_deck(deck_path)
    doc = _slide(deck, slide_index)
    reviewer, contributor = _backends(backend, config_path, log_path, original_path, slide_index)
    options = RefineOptions(
        max_iterations=max_iter,
        early_stop=early_stop,
        initial_all_tentative=initial_tentative,
    )
    trace = refine(doc, reviewer, contributor, options)
    if trace_path:
        Path(trace_path).write_text(
            json.dumps(trace_payload(trace, options), **JSON_KW), encoding="utf-8"
        )
    if out:
        Path(out).write_text(to_json(trace.final_doc()), encoding="utf-8")
    click.echo(
        f"stop_reason={trace.stop_reason} iterations={trace.iterations_used}"
        f" flags={[len(s) for s in trace.flagged_sets]}"
    )
    if trace.stop_reason == "backend_error":
        sys.exit(1)


@main.command("branch")
@click.argument("deck_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--slide", "slide_index", type=int, default=0)
@click.option("--n", type=int, default=2)
@click.option("--seed", type=int, default=0)
@click.option("--backend", type=click.Choice(["heuristic", "remote"]), default="heuristic")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True))
@handle_errors
def branch_cmd(deck_path, slide_index, n, seed, backend, out_dir, config_path):
    """Produce n independent design suggestions for one slide."""
    doc = _slide(_load_deck(deck_path), slide_index)
    _, contributor = build_backends(backend, load_config(config_path))
    branch_set = make_branches(doc, contributor, n, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for b in branch_set.branches:
        (out / f"{b.branch_id}.json").write_text(to_json(b.doc), encoding="utf-8")
        (out / f"{b.branch_id}.svg").write_text(render_svg(b.doc), encoding="utf-8")
    (out / "branches.json").write_text(
        json.dumps(
            {
                "parent": doc_payload(branch_set.parent),
                "branches": [b.branch_id for b in branch_set.branches],
                "errors": branch_set.errors,
            },
            **JSON_KW,
        ),
        encoding="utf-8",
    )
    click.echo(f"wrote {len(branch_set.branches)} branches to {out_dir}")


@main.command("eval")
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--slide", "slide_index", type=int, default=0, help="log index for deck-wide log files")
@click.option("--out", type=click.Path(dir_okay=False))
@handle_errors
def eval_cmd(trace_path, log_path, slide_index, out):
    """Reviewer precision/recall and contributor responsiveness from a
    refinement trace plus the matching perturbation log."""
    data = json.loads(Path(trace_path).read_text(encoding="utf-8"))
    options = data.get("options", {})
    if options.get("initial_all_tentative", True):
        raise click.ClickException(
            "trace was produced with an initial all-tentative pass; rerun"
            " refine with --no-initial-tentative so the first review"
            " applies to the input draft"
        )
    trace = trace_from_payload(data)
    logs = _load_logs(log_path)
    log = _pick_log(logs, slide_index)
    if not trace.flagged_sets:
        raise click.ClickException("trace has no review passes")
    labeled = with_statuses(trace.snapshots[0], trace.flagged_sets[0])
    revised = trace.snapshots[1] if len(trace.snapshots) > 1 else trace.snapshots[0]
    report = combined_report(labeled, revised, log)
    click.echo(format_report_table(report))
    if out:
        Path(out).write_text(json.dumps(report.payload(), **JSON_KW), encoding="utf-8")


@main.command("judge-export")
@click.option("--draft", required=True, type=click.Path(exists=True))
@click.option("--ours", required=True, type=click.Path(exists=True))
@click.option("--baseline", required=True, type=click.Path(exists=True))
@click.option("--slide", "slide_index", type=int, default=0)
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@handle_errors
def judge_export(draft, ours, baseline, slide_index, seed, out_dir):
    """Write a blinded pairwise-judgement bundle (renders + prompt + mapping)."""
    docs = [_slide(_load_deck(p), slide_index) for p in (draft, ours, baseline)]
    bundle = export_judgement(docs[0], docs[1], docs[2], seed, out_dir)
    click.echo(f"bundle {bundle.bundle_id} written to {out_dir}")


@main.command("win-rate")
@click.option("--verdicts", required=True, type=click.Path(exists=True),
              help="line-delimited JSON: {bundle_id, verdict}")
@click.option("--bundles", "bundle_dirs", required=True, multiple=True,
              type=click.Path(exists=True, file_okay=False))
@handle_errors
def win_rate_cmd(verdicts, bundle_dirs):
    """Unblind judge verdicts and report win fractions."""
    records = [
        json.loads(line)
        for line in Path(verdicts).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    mappings = {}
    for d in bundle_dirs:
        payload = json.loads((Path(d) / "mapping.json").read_text(encoding="utf-8"))
        mappings[payload["bundle_id"]] = payload
    click.echo(json.dumps(win_rate(records, mappings), indent=2))


@main.command()
@click.argument("deck_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--slide", "slide_index", type=int, default=0)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--highlight-tentative", is_flag=True, default=False)
@click.option("--ppi", type=int, default=96)
@handle_errors
def render(deck_path, slide_index, out, highlight_tentative, ppi):
    """Render one slide to SVG."""
    doc = _slide(_load_deck(deck_path), slide_index)
    svg = render_svg(
        doc,
        RenderOptions(pixels_per_inch=ppi, highlight_tentative=highlight_tentative),
    )
    Path(out).write_text(svg, encoding="utf-8")
    click.echo(f"wrote {out} ({estimate_token_length(svg)} proxy tokens)")


@main.command()
@click.option("--port", type=int, default=8400)
@click.option("--host", type=str, default="127.0.0.1")
@click.option("--data-dir", type=click.Path(file_okay=False))
@click.option("--backend", type=click.Choice(["heuristic", "remote"]), default="heuristic")
@click.option("--config", "config_path", type=click.Path(exists=True))
@handle_errors
def serve(port, host, data_dir, backend, config_path):
    """Run the interactive session service."""
    import uvicorn

    from .service import create_app

    reviewer, contributor = build_backends(backend, load_config(config_path))
    app = create_app(reviewer=reviewer, contributor=contributor, data_dir=data_dir)
    uvicorn.run(app, host=host, port=port)


@main.command("samples")
@click.option("--count", type=int, default=10)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@handle_errors
def samples_cmd(count, out):
    """Write the built-in sample deck (for demos and smoke tests)."""
    from .samples import sample_deck

    Path(out).write_text(deck_to_json(sample_deck(count)), encoding="utf-8")
    click.echo(f"wrote {count} sample slides to {out}")


if __name__ == "__main__":
    main()
