"""HTTP API over a workspace (FastAPI).

All success responses are canonical JSON bytes so that identical state
always serves identical payloads.
"""

from __future__ import annotations

import json
import logging

from fastapi import FastAPI, HTTPException, Request, Response

from .agent import trace_to_dict
from .errors import GroupsightError, StoreError
from .index import FusionConfig
from .jsonio import canonical_json
from .model import (
    ARTIFACT_KINDS,
    assessment_to_dict,
    concept_map_to_dict,
    parse_timestamp,
    series_to_dict,
    session_to_dict,
    discussion_to_dict,
    transcript_to_dict,
)
from .workspace import Workspace

logger = logging.getLogger(__name__)


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _parse_kinds(raw: str | None) -> tuple[str, ...]:
    if not raw:
        return ARTIFACT_KINDS
    kinds = tuple(k.strip() for k in raw.split(",") if k.strip())
    unknown = set(kinds) - set(ARTIFACT_KINDS)
    if unknown:
        raise HTTPException(status_code=422, detail=f"unknown artifact kinds: {sorted(unknown)}")
    return kinds


def create_app(workspace: Workspace, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="groupsight", docs_url=None, redoc_url=None)

    @app.get("/health")
    async def health():
        return _json_response({"status": "ok"})

    @app.get("/sessions")
    async def list_sessions():
        from .agent import ToolHost

        return _json_response(ToolHost(workspace).list_sessions())

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await _json_body(request)
        session_id = body.get("session_id")
        if not session_id:
            raise HTTPException(status_code=422, detail="session_id is required")
        started_at = None
        if body.get("started_at"):
            started_at = parse_timestamp(str(body["started_at"]))
        session = workspace.create_session(
            session_id=str(session_id),
            title=str(body.get("title", "")),
            started_at=started_at,
            metadata={str(k): str(v) for k, v in body.get("metadata", {}).items()},
        )
        return _json_response(session_to_dict(session), status_code=201)

    @app.post("/sessions/{session_id}/discussions/{discussion_id}/transcript")
    async def ingest_transcript(session_id: str, discussion_id: str, request: Request):
        raw = (await request.body()).decode("utf-8")
        records = []
        for line_no, line in enumerate(raw.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise HTTPException(status_code=422, detail=f"parse error on line {line_no}: {exc}")
        params = request.query_params
        try:
            discussion = workspace.ingest_transcript(
                records,
                session_id=session_id,
                discussion_id=discussion_id,
                group_label=params.get("group_label", ""),
                duration_ms=int(params["duration_ms"]) if "duration_ms" in params else None,
            )
        except StoreError as exc:
            raise HTTPException(status_code=404 if "unknown session" in str(exc) else 422, detail=str(exc))
        return _json_response(discussion_to_dict(discussion), status_code=201)

    @app.post("/discussions/{discussion_id}/artifacts")
    async def generate_artifacts(discussion_id: str):
        try:
            cmap, assessment, series = workspace.generate_artifacts(discussion_id)
        except StoreError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except GroupsightError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return _json_response(
            {
                "concept_map": concept_map_to_dict(cmap),
                "assessment": assessment_to_dict(assessment),
                "metrics": series_to_dict(series),
            },
            status_code=201,
        )

    @app.get("/discussions/{discussion_id}/transcript")
    async def get_transcript(discussion_id: str):
        try:
            transcript = workspace.store.read_transcript(discussion_id)
        except StoreError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return _json_response(transcript_to_dict(transcript))

    @app.get("/discussions/{discussion_id}/concept-map")
    async def get_concept_map(discussion_id: str):
        artifact = _load_artifact(workspace, discussion_id, "concept_map")
        return _json_response(concept_map_to_dict(artifact))

    @app.get("/discussions/{discussion_id}/assessment")
    async def get_assessment(discussion_id: str):
        artifact = _load_artifact(workspace, discussion_id, "assessment")
        return _json_response(assessment_to_dict(artifact))

    @app.get("/discussions/{discussion_id}/metrics")
    async def get_metrics(discussion_id: str):
        artifact = _load_artifact(workspace, discussion_id, "metrics")
        return _json_response(series_to_dict(artifact))

    @app.get("/search")
    async def search(q: str, kinds: str | None = None, n: int = 10):
        cfg = FusionConfig(rrf_k=workspace.config.rrf_k, top_n=n, allowed_kinds=_parse_kinds(kinds))
        hits = workspace.index.search_sessions(q, cfg)
        return _json_response(
            {
                "hits": [
                    {"discussion_id": h.discussion_id, "score": h.score, "kinds": list(h.kinds)}
                    for h in hits
                ]
            }
        )

    @app.post("/chat")
    async def chat(request: Request):
        body = await _json_body(request)
        query = str(body.get("query", "")).strip()
        if not query:
            raise HTTPException(status_code=422, detail="query is required")
        baseline = bool(body.get("baseline_mode", False))
        kinds = tuple(body.get("allowed_kinds") or ARTIFACT_KINDS)
        unknown = set(kinds) - set(ARTIFACT_KINDS)
        if unknown:
            raise HTTPException(status_code=422, detail=f"unknown artifact kinds: {sorted(unknown)}")
        try:
            trace = workspace.chat(query, allowed_kinds=kinds, baseline_mode=baseline)
        except GroupsightError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return _json_response(
            {
                "answer": trace.synthesis,
                "citations": [{"discussion_id": d, "kind": k} for d, k in trace.citations],
                "trace": trace_to_dict(trace),
            }
        )

    @app.get("/speakers/{speaker_id}/profile")
    async def speaker_profile(speaker_id: str):
        from .agent import speaker_profile_to_dict

        try:
            profile = workspace.speaker_profile(speaker_id)
        except StoreError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return _json_response(speaker_profile_to_dict(profile))

    if ui_dir:
        from starlette.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _load_artifact(workspace: Workspace, discussion_id: str, kind: str):
    readers = {
        "concept_map": workspace.store.read_concept_map,
        "assessment": workspace.store.read_assessment,
        "metrics": workspace.store.read_metrics,
    }
    try:
        artifact = readers[kind](discussion_id)
    except StoreError as exc:
        raise HTTPException(status_code=404, detail=str(exc))
    if artifact is None:
        raise HTTPException(status_code=404, detail=f"artifact missing: no {kind} for {discussion_id!r}")
    return artifact


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except json.JSONDecodeError as exc:
        raise HTTPException(status_code=422, detail=f"invalid JSON body: {exc}")
    if not isinstance(body, dict):
        raise HTTPException(status_code=422, detail="JSON body must be an object")
    return body
