import io
import threading

import pytest
from fastapi.testclient import TestClient

from slideloop.codec import doc_payload, to_json
from slideloop.perturb import PerturbConfig, perturb
from slideloop.pptx import Deck, deck_payload, export_pptx, load_pptx
from slideloop.samples import sample_slide
from slideloop.service import create_app


@pytest.fixture
def app(tmp_path):
    return create_app(data_dir=tmp_path / "sessions")


@pytest.fixture
def client(app):
    return TestClient(app)


def _create(client, doc):
    response = client.post("/sessions", json={"slide": doc_payload(doc)})
    assert response.status_code == 200, response.text
    return response.json()["session_id"]


def test_create_from_slide_json(client):
    doc = sample_slide(0)
    response = client.post("/sessions", json={"slide": doc_payload(doc)})
    assert response.status_code == 200
    body = response.json()
    assert body["doc"] == doc_payload(doc)
    assert body["svg"].startswith("<svg")


def test_create_from_deck_json(client):
    deck = Deck.of([sample_slide(0), sample_slide(1)])
    response = client.post(
        "/sessions", json={"deck": deck_payload(deck), "slide_index": 1}
    )
    assert response.status_code == 200
    assert response.json()["doc"] == doc_payload(sample_slide(1))


def test_create_from_pptx_upload(client):
    deck = Deck.of([sample_slide(2)])
    blob = export_pptx(deck)
    response = client.post(
        "/sessions",
        files={"file": ("deck.pptx", io.BytesIO(blob), "application/octet-stream")},
    )
    assert response.status_code == 200
    assert len(response.json()["doc"]["elements"]) == len(sample_slide(2).elements)


def test_create_requires_document(client):
    response = client.post("/sessions", json={})
    assert response.status_code == 422
    assert response.json()["error"]["kind"] == "missing_document"


def test_branch_select_slide_state_machine(client):
    doc, _ = perturb(sample_slide(3), PerturbConfig(seed=5, severity=0.5))
    sid = _create(client, doc)

    response = client.post(f"/sessions/{sid}/branch", json={"n": 2, "seed": 0})
    assert response.status_code == 200
    branches = response.json()["branches"]
    assert [b["branch_id"] for b in branches] == ["b0", "b1"]
    assert branches[0]["doc"] != branches[1]["doc"]

    picked = branches[1]["doc"]
    response = client.post(f"/sessions/{sid}/select", json={"branch_id": "b1"})
    assert response.status_code == 200
    assert response.json()["doc"] == picked

    response = client.get(f"/sessions/{sid}/slide")
    assert response.json()["doc"] == picked


def test_select_unknown_branch(client):
    sid = _create(client, sample_slide(0))
    client.post(f"/sessions/{sid}/branch", json={"n": 1})
    response = client.post(f"/sessions/{sid}/select", json={"branch_id": "b9"})
    assert response.status_code == 422
    assert response.json()["error"]["kind"] == "unknown_branch"


def test_labels_flow(client):
    doc = sample_slide(4)
    sid = _create(client, doc)
    target = doc.elements[2].id
    response = client.post(f"/sessions/{sid}/labels", json={"element_ids": [target]})
    assert response.status_code == 200
    revised = response.json()["doc"]
    assert client.get(f"/sessions/{sid}/slide").json()["doc"] == revised


def test_labels_unknown_element_is_422(client):
    sid = _create(client, sample_slide(0))
    response = client.post(
        f"/sessions/{sid}/labels", json={"element_ids": ["e0", "ghost"]}
    )
    assert response.status_code == 422
    body = response.json()["error"]
    assert body["kind"] == "unknown_elements"
    assert body["missing"] == ["ghost"]


def test_review_returns_flag_ids(client):
    doc, log = perturb(sample_slide(5), PerturbConfig(seed=6, severity=0.6))
    sid = _create(client, doc)
    response = client.post(f"/sessions/{sid}/review")
    assert response.status_code == 200
    assert isinstance(response.json()["flagged"], list)
    # review does not mutate the session document
    assert client.get(f"/sessions/{sid}/slide").json()["doc"] == doc_payload(doc)


def test_unknown_session_is_404(client):
    assert client.get("/sessions/missing/slide").status_code == 404
    assert client.post("/sessions/missing/review").status_code == 404


def test_export_pptx_round_trips(client):
    doc = sample_slide(6)
    sid = _create(client, doc)
    response = client.get(f"/sessions/{sid}/export.pptx")
    assert response.status_code == 200
    assert response.content[:2] == b"PK"
    deck, _ = load_pptx(response.content)
    assert len(deck.slides) == 1
    assert len(deck.slides[0].elements) == len(doc.elements)


def test_trace_history_grows(client):
    sid = _create(client, sample_slide(7))
    client.post(f"/sessions/{sid}/branch", json={"n": 2})
    client.post(f"/sessions/{sid}/select", json={"branch_id": "b0"})
    client.post(f"/sessions/{sid}/review")
    history = client.get(f"/sessions/{sid}/trace").json()["history"]
    assert [h["event"] for h in history] == ["created", "branch", "select", "review"]


def test_session_replay_invariant(app, client):
    doc, _ = perturb(sample_slide(8), PerturbConfig(seed=9, severity=0.4))
    sid = _create(client, doc)
    client.post(f"/sessions/{sid}/branch", json={"n": 2, "seed": 3})
    client.post(f"/sessions/{sid}/select", json={"branch_id": "b1"})
    current = client.get(f"/sessions/{sid}/slide").json()["doc"]
    eid = current["elements"][0]["id"]
    client.post(f"/sessions/{sid}/labels", json={"element_ids": [eid]})

    store = app.state.store
    live = to_json(store.get(sid).current)
    assert store.replay_current_json(sid) == live


def test_restart_restores_sessions(tmp_path):
    data_dir = tmp_path / "sessions"
    app_one = create_app(data_dir=data_dir)
    client_one = TestClient(app_one)
    sid = _create(client_one, sample_slide(9))
    client_one.post(f"/sessions/{sid}/branch", json={"n": 2})
    client_one.post(f"/sessions/{sid}/select", json={"branch_id": "b0"})
    expected = client_one.get(f"/sessions/{sid}/slide").json()["doc"]

    app_two = create_app(data_dir=data_dir)
    client_two = TestClient(app_two)
    response = client_two.get(f"/sessions/{sid}/slide")
    assert response.status_code == 200
    assert response.json()["doc"] == expected


def test_concurrent_mutations_conflict(app, client):
    doc, _ = perturb(sample_slide(0), PerturbConfig(seed=2, severity=0.4))
    sid = _create(client, doc)
    client.post(f"/sessions/{sid}/branch", json={"n": 2})

    store = app.state.store
    entered, release = threading.Event(), threading.Event()
    original_pick = store._pick_branch

    def slow_pick(session, branch_id):
        entered.set()
        assert release.wait(timeout=10)
        return original_pick(session, branch_id)

    store._pick_branch = slow_pick
    results = []
    other_client = TestClient(app)

    def first_select():
        results.append(
            other_client.post(f"/sessions/{sid}/select", json={"branch_id": "b0"}).status_code
        )

    worker = threading.Thread(target=first_select)
    worker.start()
    try:
        assert entered.wait(timeout=10)
        # second mutation while the first holds the session lock
        blocked = client.post(f"/sessions/{sid}/select", json={"branch_id": "b1"})
        assert blocked.status_code == 409
        assert blocked.json()["error"]["kind"] == "session_conflict"
    finally:
        release.set()
        worker.join(timeout=10)
        store._pick_branch = original_pick
    assert results == [200]


def test_reads_allowed_during_mutation(app, client):
    sid = _create(client, sample_slide(1))
    session = app.state.store.get(sid)
    assert session.lock.acquire(blocking=False)
    try:
        assert client.get(f"/sessions/{sid}/slide").status_code == 200
        assert client.post(f"/sessions/{sid}/branch", json={"n": 1}).status_code == 409
    finally:
        session.lock.release()


def test_healthz(client):
    assert client.get("/healthz").json() == {"status": "ok"}


def test_remote_results_replay_without_backend_calls(tmp_path):
    import json as jsonlib

    from slideloop.codec import to_json as doc_to_json
    from slideloop.model import clear_statuses
    from slideloop.roles import HeuristicReviewer, RemoteContributor, RemoteModelConfig
    from slideloop.service import SessionStore

    calls = {"n": 0}

    def transport(messages, temperature, seed):
        calls["n"] += 1
        doc = clear_statuses(sample_slide(1))
        doc.elements[0].position.x = 100000 + calls["n"] * 1000
        return doc_to_json(doc)

    contributor = RemoteContributor(
        RemoteModelConfig(endpoint="http://model.invalid", model="m"),
        transport=transport,
    )
    data_dir = tmp_path / "sessions"
    store = SessionStore(HeuristicReviewer(), contributor, data_dir=data_dir)
    assert store.deterministic is False

    session = store.create(sample_slide(1))
    sid = session.session_id
    store.branch(sid, 2, seed=0)
    store.select(sid, "b1")
    store.apply_labels(sid, [store.get(sid).current.elements[0].id])
    live = doc_to_json(store.get(sid).current)
    made_calls = calls["n"]
    assert made_calls >= 3  # two branch passes + one labels pass

    events = [
        jsonlib.loads(line)
        for line in (data_dir / f"{sid}.jsonl").read_text().splitlines()
        if line.strip()
    ]
    rebuilt = store.replay(events)
    assert doc_to_json(rebuilt.current) == live
    assert calls["n"] == made_calls  # replay used stored results, no new calls


def test_remote_backend_failure_maps_to_502(tmp_path):
    from slideloop.errors import BackendError
    from slideloop.roles import Reviewer

    class FailingReviewer(Reviewer):
        def flag_ids(self, doc):
            raise BackendError("model endpoint unreachable", raw_response="<html>504</html>")

    app = create_app(reviewer=FailingReviewer(), data_dir=tmp_path)
    client = TestClient(app)
    sid = _create(client, sample_slide(0))
    response = client.post(f"/sessions/{sid}/review")
    assert response.status_code == 502
    body = response.json()["error"]
    assert body["kind"] == "backend_error"
    assert body["raw_response"] == "<html>504</html>"


def test_bad_slide_index_is_422(client):
    deck = Deck.of([sample_slide(0)])
    response = client.post(
        "/sessions", json={"deck": deck_payload(deck), "slide_index": 5}
    )
    assert response.status_code == 422
    assert response.json()["error"]["kind"] == "bad_slide_index"


def test_ui_mount_serves_static_files(tmp_path):
    ui_dir = tmp_path / "dist"
    ui_dir.mkdir()
    (ui_dir / "index.html").write_text("<!doctype html><title>studio</title>")
    app = create_app(ui_dir=ui_dir)
    client = TestClient(app)
    response = client.get("/ui/")
    assert response.status_code == 200
    assert "studio" in response.text
