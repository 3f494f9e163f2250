"""Session state with an append-only event log.

A session tracks one slide through an interactive refinement: the parent
document, the current document, the latest branch set, and the full action
history. Every state change appends one JSON line to the session's log
file; replaying a log through the same deterministic backends reconstructs
the state exactly (non-deterministic backends store their results inline),
which doubles as crash recovery on restart.

Concurrency: mutating operations on one session are mutually exclusive and
never queue; a second writer gets a conflict immediately. Reads are free.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from ..codec import doc_from_payload, doc_payload, to_json
from ..errors import (
    SessionConflict,
    UnknownBranchError,
    UnknownSessionError,
)
from ..model import SlideDoc, tentative_ids
from ..orchestrate import (
    Branch,
    BranchSet,
    RefinementTrace,
    STOP_MAX_ITERATIONS,
    apply_user_labels,
    branch,
)
from ..roles import Contributor, RemoteContributor, RemoteReviewer, Reviewer


def _replayed_branch(parent: SlideDoc, branch_id: str, doc: SlideDoc) -> Branch:
    return Branch(
        branch_id=branch_id,
        doc=doc,
        trace=RefinementTrace(
            snapshots=[parent, doc],
            flagged_sets=[set(parent.element_ids())],
            stop_reason=STOP_MAX_ITERATIONS,
            iterations_used=1,
        ),
    )


@dataclass
class Session:
    session_id: str
    parent: SlideDoc
    current: SlideDoc
    branch_set: BranchSet | None = None
    history: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(
        self,
        reviewer: Reviewer,
        contributor: Contributor,
        data_dir: str | Path | None = None,
    ):
        self.reviewer = reviewer
        self.contributor = contributor
        self.data_dir = Path(data_dir) if data_dir is not None else None
        # remote backends are not replayable, so their results are persisted
        self.deterministic = not isinstance(
            contributor, RemoteContributor
        ) and not isinstance(reviewer, RemoteReviewer)
        self.sessions: dict[str, Session] = {}
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._restore_from_disk()

    # -- lifecycle ---------------------------------------------------------

    def create(self, doc: SlideDoc) -> Session:
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            parent=doc,
            current=doc,
        )
        self.sessions[session.session_id] = session
        self._log(session, {"event": "created", "parent": doc_payload(doc)})
        return session

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        return session

    @contextmanager
    def mutate(self, session_id: str):
        """Single-writer guard; raises :class:`SessionConflict` instead of
        queueing a second concurrent mutation."""
        session = self.get(session_id)
        if not session.lock.acquire(blocking=False):
            raise SessionConflict(
                f"session {session_id} has a mutation in flight"
            )
        try:
            yield session
        finally:
            session.lock.release()

    # -- actions -----------------------------------------------------------

    def branch(self, session_id: str, n: int, seed: int = 0) -> BranchSet:
        with self.mutate(session_id) as session:
            branch_set = branch(session.current, self.contributor, n, seed)
            session.branch_set = branch_set
            event: dict = {"event": "branch", "n": n, "seed": seed}
            if not self.deterministic:
                event["docs"] = {
                    b.branch_id: doc_payload(b.doc) for b in branch_set.branches
                }
            self._log(session, event)
            return branch_set

    def select(self, session_id: str, branch_id: str) -> SlideDoc:
        with self.mutate(session_id) as session:
            selected = self._pick_branch(session, branch_id)
            session.current = selected
            session.branch_set = None
            self._log(session, {"event": "select", "branch_id": branch_id})
            return selected

    def _pick_branch(self, session: Session, branch_id: str) -> SlideDoc:
        if session.branch_set is None:
            raise UnknownBranchError("session has no open branch set")
        picked = session.branch_set.get(branch_id)
        if picked is None:
            raise UnknownBranchError(f"unknown branch {branch_id!r}")
        return picked.doc

    def apply_labels(self, session_id: str, element_ids: list[str]) -> SlideDoc:
        with self.mutate(session_id) as session:
            labeled = apply_user_labels(session.current, element_ids)
            revised = self.contributor.contribute(labeled)
            session.current = revised
            event: dict = {"event": "labels", "element_ids": sorted(element_ids)}
            if not self.deterministic:
                event["result"] = doc_payload(revised)
            self._log(session, event)
            return revised

    def review(self, session_id: str) -> set[str]:
        session = self.get(session_id)
        flagged = tentative_ids(self.reviewer.review(session.current))
        self._log(session, {"event": "review", "flagged": sorted(flagged)})
        return flagged

    # -- persistence & replay ----------------------------------------------

    def _log(self, session: Session, event: dict) -> None:
        session.history.append(event)
        if self.data_dir is not None:
            path = self.data_dir / f"{session.session_id}.jsonl"
            with path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def replay(self, events: list[dict], session_id: str = "replay") -> Session:
        """Rebuild a session from its event log using the same backends."""
        session: Session | None = None
        for event in events:
            kind = event["event"]
            if kind == "created":
                parent = doc_from_payload(event["parent"], tolerant=True)
                session = Session(session_id=session_id, parent=parent, current=parent)
                session.history = list(events)
            elif session is None:
                raise UnknownSessionError("event log does not start with 'created'")
            elif kind == "branch":
                if "docs" in event:
                    # results were stored (non-deterministic backend); do not
                    # touch the backend during replay
                    branch_set = BranchSet(parent=session.current)
                    for branch_id, payload in event["docs"].items():
                        doc = doc_from_payload(payload, tolerant=True)
                        branch_set.branches.append(
                            _replayed_branch(session.current, branch_id, doc)
                        )
                else:
                    branch_set = branch(
                        session.current, self.contributor, event["n"], event["seed"]
                    )
                session.branch_set = branch_set
            elif kind == "select":
                session.current = self._pick_branch(session, event["branch_id"])
                session.branch_set = None
            elif kind == "labels":
                if "result" in event:
                    session.current = doc_from_payload(event["result"], tolerant=True)
                else:
                    labeled = apply_user_labels(session.current, event["element_ids"])
                    session.current = self.contributor.contribute(labeled)
            elif kind == "review":
                pass  # read-only action, state unaffected
        if session is None:
            raise UnknownSessionError("empty event log")
        return session

    def replay_current_json(self, session_id: str) -> str:
        """Canonical JSON of the current doc as reconstructed by replaying
        the persisted log; the session-replay invariant compares this
        against the live state."""
        session = self.get(session_id)
        rebuilt = self.replay(session.history, session_id=session_id)
        return to_json(rebuilt.current)

    def _restore_from_disk(self) -> None:
        for path in sorted(self.data_dir.glob("*.jsonl")):
            try:
                events = [
                    json.loads(line)
                    for line in path.read_text(encoding="utf-8").splitlines()
                    if line.strip()
                ]
                session = self.replay(events, session_id=path.stem)
            except Exception:
                continue  # a corrupt log must not block startup
            self.sessions[session.session_id] = session


__all__ = ["Session", "SessionStore"]
