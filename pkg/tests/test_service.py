"""HTTP API integration tests over a temp workspace."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from groupsight.service import create_app

TRANSCRIPT_JSONL = "\n".join(
    [
        json.dumps({"speaker_id": "alice", "start_ms": 0, "end_ms": 4000, "text": "We sketched the budget plan today."}),
        json.dumps({"speaker_id": "bob", "start_ms": 4000, "end_ms": 9000, "text": "The plan still needs review."}),
    ]
)


@pytest.fixture
def client(workspace) -> TestClient:
    return TestClient(create_app(workspace))


def ingest_fixture(client: TestClient):
    assert client.post("/sessions", json={"session_id": "s1", "title": "Workshop"}).status_code == 201
    response = client.post(
        "/sessions/s1/discussions/d1/transcript",
        content=TRANSCRIPT_JSONL,
        params={"group_label": "g1"},
    )
    assert response.status_code == 201, response.text
    return response


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_list_sessions_endpoint(client):
    assert client.get("/sessions").json() == {"sessions": []}
    ingest_fixture(client)
    body = client.get("/sessions").json()
    assert len(body["sessions"]) == 1
    session = body["sessions"][0]
    assert session["session_id"] == "s1"
    assert [d["discussion_id"] for d in session["discussions"]] == ["d1"]


def test_full_round_trip_over_http(client):
    ingest_fixture(client)

    generated = client.post("/discussions/d1/artifacts")
    assert generated.status_code == 201
    body = generated.json()
    assert set(body) == {"concept_map", "assessment", "metrics"}

    transcript = client.get("/discussions/d1/transcript").json()
    assert len(transcript["utterances"]) == 2
    assert transcript["utterances"][0]["speaker_id"] == "alice"

    cmap = client.get("/discussions/d1/concept-map").json()
    assert cmap["nodes"]
    assessment = client.get("/discussions/d1/assessment").json()
    assert len(assessment["dimensions"]) == 7
    metrics = client.get("/discussions/d1/metrics").json()
    assert len(metrics["values"]) == 2

    search = client.get("/search", params={"q": "budget plan", "n": 5}).json()
    assert search["hits"]
    assert search["hits"][0]["discussion_id"] == "d1"
    assert set(search["hits"][0]) == {"discussion_id", "score", "kinds"}


def test_search_restricted_kinds(client):
    ingest_fixture(client)
    response = client.get("/search", params={"q": "budget", "kinds": "transcript"}).json()
    for hit in response["hits"]:
        assert hit["kinds"] == ["transcript"]
    assert client.get("/search", params={"q": "x", "kinds": "bogus"}).status_code == 422


def test_chat_round_trip_with_trace(client):
    ingest_fixture(client)
    client.post("/discussions/d1/artifacts")
    response = client.post("/chat", json={"query": "what was discussed?"})
    assert response.status_code == 200
    body = response.json()
    assert set(body) == {"answer", "citations", "trace"}
    trace = body["trace"]
    assert trace["stopped_reason"] in ("finished", "iteration_cap")
    assert len(trace["iterations"]) <= 8
    for citation in body["citations"]:
        assert set(citation) == {"discussion_id", "kind"}


def test_chat_baseline_never_touches_assessments(client):
    ingest_fixture(client)
    client.post("/discussions/d1/artifacts")
    body = client.post("/chat", json={"query": "evaluate collaboration", "baseline_mode": True}).json()
    for iteration in body["trace"]["iterations"]:
        for result in iteration["tool_results"]:
            if result["tool"] in ("get_concept_map", "get_assessment"):
                assert not result["ok"]
            if result["tool"] == "search_sessions" and result["ok"]:
                for hit in result["payload"]["hits"]:
                    assert hit["kinds"] == ["transcript"]
    for citation in body["citations"]:
        assert citation["kind"] == "transcript"


def test_chat_requires_query(client):
    assert client.post("/chat", json={}).status_code == 422


def test_speaker_profile_endpoint(client):
    ingest_fixture(client)
    client.post("/discussions/d1/artifacts")
    body = client.get("/speakers/alice/profile").json()
    assert body["speaker_id"] == "alice"
    assert "d1" in body["participation_share"]
    assert client.get("/speakers/nobody/profile").status_code == 404


def test_missing_resources_404(client):
    assert client.get("/discussions/nope/transcript").status_code == 404
    assert client.get("/discussions/nope/concept-map").status_code == 404
    ingest_fixture(client)
    assert client.get("/discussions/d1/concept-map").status_code == 404  # not generated yet


def test_transcript_parse_error_names_line(client):
    client.post("/sessions", json={"session_id": "s1"})
    response = client.post("/sessions/s1/discussions/d1/transcript", content='{"ok": 1}\n{bad')
    assert response.status_code == 422
    assert "line 2" in response.json()["detail"]


def test_ingest_unknown_session_404(client):
    response = client.post("/sessions/ghost/discussions/d1/transcript", content=TRANSCRIPT_JSONL)
    assert response.status_code == 404


def test_responses_are_canonical_json(client):
    ingest_fixture(client)
    raw = client.get("/discussions/d1/transcript").content.decode("utf-8")
    parsed = json.loads(raw)
    canonical = json.dumps(parsed, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    assert raw == canonical
