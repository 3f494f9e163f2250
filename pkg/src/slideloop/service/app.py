"""HTTP service exposing the refinement pipeline to interactive clients.

All request/response bodies carry slide documents in the canonical JSON
wire format. Mutating endpoints on one session are serialized; a concurrent
mutation gets 409 rather than queueing.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..codec import doc_from_payload, doc_payload
from ..errors import IngestError, SlideloopError
from ..model import SlideDoc
from ..pptx import Deck, export_pptx, load_pptx
from ..render import RenderOptions, render_svg
from ..roles import Contributor, HeuristicContributor, HeuristicReviewer, Reviewer
from .schemas import (
    BranchRequest,
    BranchResponse,
    BranchView,
    CreateSessionRequest,
    CreateSessionResponse,
    LabelsRequest,
    ReviewResponse,
    SelectRequest,
    SlideView,
    TraceResponse,
)
from .store import SessionStore

_STATUS_BY_KIND = {
    "unknown_session": 404,
    "session_conflict": 409,
    "backend_error": 502,
    "irreparable_response": 502,
}
_DEFAULT_ERROR_STATUS = 422

PPTX_MEDIA_TYPE = (
    "application/vnd.openxmlformats-officedocument.presentationml.presentation"
)


def create_app(
    reviewer: Reviewer | None = None,
    contributor: Contributor | None = None,
    data_dir: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    store = SessionStore(
        reviewer=reviewer or HeuristicReviewer(),
        contributor=contributor or HeuristicContributor(),
        data_dir=data_dir,
    )
    app = FastAPI(title="slideloop", version="0.1.0")
    app.state.store = store

    @app.exception_handler(SlideloopError)
    async def on_error(_: Request, exc: SlideloopError):
        status = _STATUS_BY_KIND.get(exc.kind, _DEFAULT_ERROR_STATUS)
        return JSONResponse(status_code=status, content={"error": exc.payload()})

    def render(doc: SlideDoc) -> str:
        return render_svg(doc, RenderOptions(highlight_tentative=True))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", response_model=CreateSessionResponse)
    async def create_session(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                raise IngestError("multipart upload needs a 'file' field",
                                  kind="missing_upload")
            slide_index = int(form.get("slide_index", 0))
            deck, _ = load_pptx(await upload.read())
            doc = _pick_slide(deck, slide_index)
        else:
            body = CreateSessionRequest.model_validate(await request.json())
            if body.slide is not None:
                doc = doc_from_payload(body.slide, tolerant=True)
            elif body.deck is not None:
                from ..pptx import deck_from_payload

                doc = _pick_slide(
                    deck_from_payload(body.deck, tolerant=True), body.slide_index
                )
            else:
                raise IngestError("request carries neither 'slide' nor 'deck'",
                                  kind="missing_document")
        session = store.create(doc)
        return CreateSessionResponse(
            session_id=session.session_id,
            doc=doc_payload(session.current),
            svg=render(session.current),
        )

    @app.get("/sessions/{session_id}/slide", response_model=SlideView)
    def get_slide(session_id: str):
        session = store.get(session_id)
        return SlideView(
            session_id=session_id,
            doc=doc_payload(session.current),
            svg=render(session.current),
            flagged=[],
        )

    @app.post("/sessions/{session_id}/branch", response_model=BranchResponse)
    def branch_session(session_id: str, body: BranchRequest):
        branch_set = store.branch(session_id, body.n, body.seed)
        return BranchResponse(
            session_id=session_id,
            branches=[
                BranchView(
                    branch_id=b.branch_id,
                    doc=doc_payload(b.doc),
                    svg=render(b.doc),
                )
                for b in branch_set.branches
            ],
            errors=branch_set.errors,
        )

    @app.post("/sessions/{session_id}/select", response_model=SlideView)
    def select_branch(session_id: str, body: SelectRequest):
        doc = store.select(session_id, body.branch_id)
        return SlideView(
            session_id=session_id, doc=doc_payload(doc), svg=render(doc), flagged=[]
        )

    @app.post("/sessions/{session_id}/labels", response_model=SlideView)
    def apply_labels(session_id: str, body: LabelsRequest):
        doc = store.apply_labels(session_id, body.element_ids)
        return SlideView(
            session_id=session_id, doc=doc_payload(doc), svg=render(doc), flagged=[]
        )

    @app.post("/sessions/{session_id}/review", response_model=ReviewResponse)
    def review_session(session_id: str):
        flagged = store.review(session_id)
        return ReviewResponse(session_id=session_id, flagged=sorted(flagged))

    @app.get("/sessions/{session_id}/trace", response_model=TraceResponse)
    def get_trace(session_id: str):
        session = store.get(session_id)
        return TraceResponse(
            session_id=session_id,
            parent=doc_payload(session.parent),
            current=doc_payload(session.current),
            history=session.history,
        )

    @app.get("/sessions/{session_id}/export.pptx")
    def export_session(session_id: str):
        session = store.get(session_id)
        blob = export_pptx(Deck.of([session.current], title=""))
        return Response(content=blob, media_type=PPTX_MEDIA_TYPE)

    ui_path = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if ui_path.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app


def _pick_slide(deck: Deck, index: int) -> SlideDoc:
    if not deck.slides:
        raise IngestError("deck has no slides", kind="empty_deck")
    if not 0 <= index < len(deck.slides):
        raise IngestError(
            f"slide index {index} out of range 0..{len(deck.slides) - 1}",
            kind="bad_slide_index",
        )
    return deck.slides[index]


__all__ = ["create_app", "PPTX_MEDIA_TYPE"]
