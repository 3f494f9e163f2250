"""Iterative slide-design refinement toolkit.

Core pieces: a canonical JSON slide model, a pptx reader/writer for the
supported design scope, a perturbation engine that simulates rough drafts,
reviewer/contributor roles with oracle, heuristic and remote backends, a
refinement loop with branching, evaluation metrics, an SVG renderer, and a
session service for interactive use.
"""

from .model import (  # noqa: F401
    Alignment,
    Color,
    Element,
    Fill,
    FillMode,
    Geometry,
    ShapeKind,
    SlideDoc,
    Status,
    TextFrame,
    TextRun,
    diff,
    validate,
)
from .codec import estimate_token_length, from_json, to_json  # noqa: F401

__version__ = "0.1.0"
