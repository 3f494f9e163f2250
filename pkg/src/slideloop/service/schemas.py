"""Pydantic request/response models for the HTTP API.

Slide documents travel as plain JSON objects in the canonical wire format
(see the versioned schema resource); the service validates them through the
codec, not through pydantic, so the schema has a single owner.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    slide: dict | None = None
    deck: dict | None = None
    slide_index: int = 0


class SlideView(BaseModel):
    session_id: str
    doc: dict
    svg: str
    flagged: list[str] = Field(default_factory=list)


class CreateSessionResponse(BaseModel):
    session_id: str
    doc: dict
    svg: str


class BranchRequest(BaseModel):
    n: int = Field(default=2, ge=1)
    seed: int = 0


class BranchView(BaseModel):
    branch_id: str
    doc: dict
    svg: str


class BranchResponse(BaseModel):
    session_id: str
    branches: list[BranchView]
    errors: list[dict] = Field(default_factory=list)


class SelectRequest(BaseModel):
    branch_id: str


class LabelsRequest(BaseModel):
    element_ids: list[str]


class ReviewResponse(BaseModel):
    session_id: str
    flagged: list[str]


class TraceResponse(BaseModel):
    session_id: str
    parent: dict
    current: dict
    history: list[dict]


class ErrorDetail(BaseModel):
    kind: str
    message: str


class ErrorResponse(BaseModel):
    error: dict
