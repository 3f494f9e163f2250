"""Exception hierarchy shared across the package.

Every error carries a machine-readable ``kind`` so the CLI and service can
emit structured error payloads without string matching.
"""

from __future__ import annotations


class SlideloopError(Exception):
    kind = "error"

    def payload(self) -> dict:
        return {"kind": self.kind, "message": str(self)}


class ParseError(SlideloopError):
    """Malformed JSON input; ``byte_offset`` points at the first bad byte."""

    kind = "parse_error"

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset

    def payload(self) -> dict:
        out = super().payload()
        out["byte_offset"] = self.byte_offset
        return out


class SchemaError(SlideloopError):
    """Structurally valid JSON that violates the document schema."""

    kind = "schema_error"

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ScopeError(SchemaError):
    """Content outside the supported design scope (e.g. unknown shape name)."""

    kind = "scope_error"


class ValidationFailure(SlideloopError):
    kind = "validation_error"

    def __init__(self, violations):
        self.violations = list(violations)
        ids = sorted({v.element_id for v in self.violations if v.element_id})
        super().__init__(
            "document violates invariants"
            + (f" (elements: {', '.join(ids)})" if ids else "")
        )

    def payload(self) -> dict:
        out = super().payload()
        out["violations"] = [
            {"element_id": v.element_id, "rule": v.rule, "message": v.message}
            for v in self.violations
        ]
        return out


class BudgetError(SlideloopError):
    kind = "budget_error"


class IngestError(SlideloopError):
    kind = "ingest_error"

    def __init__(self, message: str, kind: str = "ingest_error"):
        super().__init__(message)
        self.kind = kind


class BackendError(SlideloopError):
    """A reviewer/contributor backend failed; ``raw_response`` keeps evidence."""

    kind = "backend_error"

    def __init__(self, message: str, raw_response: str | None = None):
        super().__init__(message)
        self.raw_response = raw_response

    def payload(self) -> dict:
        out = super().payload()
        out["raw_response"] = self.raw_response
        return out


class IrreparableResponseError(BackendError):
    kind = "irreparable_response"


class ConsistencyError(SlideloopError):
    kind = "consistency_error"


class UnknownElementError(SlideloopError):
    kind = "unknown_elements"

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"unknown element ids: {', '.join(self.missing)}")

    def payload(self) -> dict:
        out = super().payload()
        out["missing"] = self.missing
        return out


class SessionConflict(SlideloopError):
    kind = "session_conflict"


class UnknownSessionError(SlideloopError):
    kind = "unknown_session"


class UnknownBranchError(SlideloopError):
    kind = "unknown_branch"


class RenderError(SlideloopError):
    kind = "render_error"
