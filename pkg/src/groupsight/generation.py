"""Produce concept maps and collaboration assessments from transcripts.

The prompt builders embed the closed node/edge vocabularies and the seven
dimension definitions verbatim, plus the expected structured-output shape.
Provider output is parsed and validated; a single repair round-trip
re-prompts with the validation errors appended, after which the artifact
is rejected (raw output retained on the exception for audit).
"""

from __future__ import annotations

import json
import logging
from datetime import datetime
from typing import Any

from .anchoring import anchor_evidence
from .errors import InvalidArtifactError
from .model import (
    EDGE_TYPES,
    MAX_LABEL_CHARS,
    NODE_TYPES,
    ConceptEdge,
    ConceptMap,
    ConceptNode,
    DimensionAssessment,
    SevenCAssessment,
    Transcript,
    dimension_display,
    validate_assessment,
    validate_concept_map,
)
from .providers import (
    GenerationProvider,
    GenerationRequest,
    call_with_retries,
    render_transcript_lines,
    schema_errors,
)
from .textutil import round_half_up, truncate_text

logger = logging.getLogger(__name__)

# Rubric definitions handed to the provider for every assessment prompt.
DIMENSION_DEFINITIONS: dict[str, str] = {
    "climate": "the emotional and affective aspects of the collaboration",
    "communication": "the quantity and quality of information shared among group members",
    "compatibility": "how well group members' working and interaction styles complement each other",
    "conflict": "students' approaches to handling challenging or contentious situations that arise",
    "context": "the who, why, and where of the collaboration",
    "contribution": "what each individual brings to the group",
    "constructive": "the overall goals of the collaboration and the team's progress toward achieving them",
}

CONCEPT_MAP_SYSTEM_TEXT = (
    "You analyze a group discussion transcript and produce a concept map of the "
    "emergent ideas and the relationships between them.\n"
    "Allowed node types (use no others): " + ", ".join(NODE_TYPES) + ".\n"
    "Allowed relationship types (use no others): " + ", ".join(EDGE_TYPES) + ".\n"
    "Respond with a single JSON object:\n"
    '{"nodes": [{"node_id": str, "label": str (<= 120 chars), "node_type": str, '
    '"description": str, "source_utterance_indices": [int], "speaker_ids": [str]}], '
    '"edges": [{"edge_id": str, "source": node_id, "target": node_id, '
    '"edge_type": str, "rationale": str}]}\n'
    "Node ids must be unique, edges must reference existing nodes, and "
    "source_utterance_indices must be valid utterance indices from the transcript."
)

ASSESSMENT_SYSTEM_TEXT = (
    "You assess the quality of collaboration in a group discussion transcript "
    "along seven dimensions. The dimension definitions are:\n"
    + "\n".join(
        f"- {dimension_display(name)}: {definition}"
        for name, definition in DIMENSION_DEFINITIONS.items()
    )
    + "\n"
    "For every dimension give a numeric score from 0 to 100, a brief analysis of the "
    "observed patterns that explains the score, and key evidence excerpts quoted from "
    "the transcript. Leave key_evidence empty when the transcript offers insufficient "
    "evidence for the dimension.\n"
    "Respond with a single JSON object:\n"
    '{"dimensions": [{"dimension": str (lowercase name), "score": int, '
    '"analysis": str, "key_evidence": [str]}]} with exactly one entry per dimension.'
)


def build_concept_map_request(transcript: Transcript) -> GenerationRequest:
    return GenerationRequest(
        prompt_kind="concept_map",
        system_text=CONCEPT_MAP_SYSTEM_TEXT,
        user_text=render_transcript_lines(transcript.utterances),
        schema_id="concept_map_v1",
    )


def build_assessment_request(transcript: Transcript) -> GenerationRequest:
    return GenerationRequest(
        prompt_kind="assessment",
        system_text=ASSESSMENT_SYSTEM_TEXT,
        user_text=render_transcript_lines(transcript.utterances),
        schema_id="assessment_v1",
    )


def _repair_request(original: GenerationRequest, raw_text: str, errors: list[str]) -> GenerationRequest:
    note = (
        "\n\nYour previous response violated the output contract:\n"
        + "\n".join(f"- {e}" for e in errors)
        + "\nPrevious response:\n"
        + raw_text
        + "\nProduce a corrected JSON object that fixes every violation."
    )
    return GenerationRequest(
        prompt_kind=original.prompt_kind,
        system_text=original.system_text,
        user_text=original.user_text + note,
        schema_id=original.schema_id,
        max_output_tokens=original.max_output_tokens,
    )


def _payload_or_errors(response) -> tuple[Any, list[str]]:
    try:
        payload = response.payload()
    except (json.JSONDecodeError, ValueError) as exc:
        return None, [f"unparseable-output: {exc}"]
    return payload, []


def _parse_concept_map_payload(
    payload: Any, discussion_id: str, generated_at: datetime, provider_tag: str
) -> tuple[ConceptMap | None, list[str]]:
    errors = schema_errors("concept_map_v1", payload)
    if errors:
        return None, errors
    nodes = []
    for entry in payload["nodes"]:
        if not isinstance(entry, dict) or "node_id" not in entry or "label" not in entry or "node_type" not in entry:
            errors.append("malformed-node: each node needs node_id, label and node_type")
            continue
        try:
            indices = tuple(int(i) for i in entry.get("source_utterance_indices", []))
        except (TypeError, ValueError):
            errors.append(f"malformed-node: bad source_utterance_indices on {entry.get('node_id')!r}")
            indices = ()
        nodes.append(
            ConceptNode(
                node_id=str(entry["node_id"]),
                label=truncate_text(str(entry["label"]), MAX_LABEL_CHARS),
                node_type=str(entry["node_type"]),
                description=str(entry.get("description", "")),
                source_utterance_indices=indices,
                speaker_ids=tuple(str(s) for s in entry.get("speaker_ids", [])),
            )
        )
    edges = []
    for entry in payload["edges"]:
        if not isinstance(entry, dict) or not {"edge_id", "source", "target", "edge_type"} <= entry.keys():
            errors.append("malformed-edge: each edge needs edge_id, source, target and edge_type")
            continue
        edges.append(
            ConceptEdge(
                edge_id=str(entry["edge_id"]),
                source=str(entry["source"]),
                target=str(entry["target"]),
                edge_type=str(entry["edge_type"]),
                rationale=str(entry.get("rationale", "")),
            )
        )
    if errors:
        return None, errors
    return (
        ConceptMap(
            discussion_id=discussion_id,
            nodes=tuple(nodes),
            edges=tuple(edges),
            generated_at=generated_at,
            provider_tag=provider_tag,
        ),
        [],
    )


def _parse_assessment_payload(
    payload: Any, discussion_id: str, generated_at: datetime, provider_tag: str
) -> tuple[SevenCAssessment | None, list[str]]:
    errors = schema_errors("assessment_v1", payload)
    if errors:
        return None, errors
    dims = []
    for entry in payload["dimensions"]:
        if not isinstance(entry, dict) or "dimension" not in entry or "score" not in entry:
            errors.append("malformed-dimension: each entry needs dimension and score")
            continue
        raw_score = entry["score"]
        if isinstance(raw_score, bool) or not isinstance(raw_score, (int, float)):
            errors.append(f"malformed-dimension: non-numeric score for {entry.get('dimension')!r}")
            continue
        dims.append(
            DimensionAssessment(
                dimension=str(entry["dimension"]).strip().lower(),
                score=round_half_up(float(raw_score)),
                analysis=str(entry.get("analysis", "")),
                key_evidence=tuple(
                    str(e) for e in entry.get("key_evidence", []) if str(e).strip()
                ),
            )
        )
    if errors:
        return None, errors
    return (
        SevenCAssessment(
            discussion_id=discussion_id,
            dimensions=tuple(dims),
            generated_at=generated_at,
            provider_tag=provider_tag,
        ),
        [],
    )


def _generate_validated(provider, request, parse, validate, retries, backoff_s):
    response = call_with_retries(provider, request, retries=retries, backoff_s=backoff_s)
    payload, errors = _payload_or_errors(response)
    artifact = None
    if not errors:
        artifact, errors = parse(payload, response)
    if artifact is not None and not errors:
        errors = validate(artifact)
    if not errors:
        return artifact

    logger.info("artifact failed validation, attempting repair: %s", errors)
    repair = _repair_request(request, response.raw_text, errors)
    response = call_with_retries(provider, repair, retries=retries, backoff_s=backoff_s)
    payload, errors = _payload_or_errors(response)
    artifact = None
    if not errors:
        artifact, errors = parse(payload, response)
    if artifact is not None and not errors:
        errors = validate(artifact)
    if not errors:
        return artifact
    raise InvalidArtifactError(
        f"provider produced an invalid {request.prompt_kind} after repair",
        errors,
        raw_text=response.raw_text,
    )


def generate_concept_map(
    transcript: Transcript,
    provider: GenerationProvider,
    generated_at: datetime,
    retries: int = 2,
    backoff_s: float = 0.5,
) -> ConceptMap:
    """Generate, validate and return a concept map for the transcript."""
    request = build_concept_map_request(transcript)
    return _generate_validated(
        provider,
        request,
        parse=lambda payload, resp: _parse_concept_map_payload(
            payload, transcript.discussion_id, generated_at, resp.provider_tag
        ),
        validate=lambda artifact: validate_concept_map(artifact, transcript),
        retries=retries,
        backoff_s=backoff_s,
    )


def generate_assessment(
    transcript: Transcript,
    provider: GenerationProvider,
    generated_at: datetime,
    retries: int = 2,
    backoff_s: float = 0.5,
) -> SevenCAssessment:
    """Generate and validate an assessment; every evidence excerpt gets anchored."""
    request = build_assessment_request(transcript)
    assessment = _generate_validated(
        provider,
        request,
        parse=lambda payload, resp: _parse_assessment_payload(
            payload, transcript.discussion_id, generated_at, resp.provider_tag
        ),
        validate=validate_assessment,
        retries=retries,
        backoff_s=backoff_s,
    )
    anchored = []
    for dim in assessment.dimensions:
        anchors = tuple(anchor_evidence(e, transcript) for e in dim.key_evidence)
        unanchored = [a.excerpt for a in anchors if a.utterance_index is None]
        if unanchored:
            logger.warning(
                "%s: %d evidence excerpt(s) could not be anchored",
                dimension_display(dim.dimension),
                len(unanchored),
            )
        anchored.append(
            DimensionAssessment(
                dimension=dim.dimension,
                score=dim.score,
                analysis=dim.analysis,
                key_evidence=dim.key_evidence,
                evidence_anchors=anchors,
            )
        )
    return SevenCAssessment(
        discussion_id=assessment.discussion_id,
        dimensions=tuple(anchored),
        generated_at=assessment.generated_at,
        provider_tag=assessment.provider_tag,
    )
