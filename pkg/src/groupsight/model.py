"""Canonical domain types, validation, and deterministic serialization.

All types are immutable value objects (frozen dataclasses with tuple
collections) and are safe to share across threads.  Closed vocabularies
(node types, edge types, assessment dimensions, artifact kinds) are plain
lowercase strings checked by the ``validate_*`` functions rather than
Python enums, so that out-of-vocabulary provider output can be represented
long enough to be rejected with a useful message.

JSON codecs follow one convention: field names match the dataclass fields,
vocabulary values are lowercase strings with spaces preserved (e.g.
``"builds on"``), timestamps are ISO-8601 strings in UTC.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from .errors import ArtifactValidationError
from .textutil import truncate_text

NODE_TYPES: tuple[str, ...] = (
    "idea",
    "question",
    "hypothesis",
    "example",
    "problem",
    "solution",
    "goal",
    "uncertainty",
    "conclusion",
    "action",
)

EDGE_TYPES: tuple[str, ...] = (
    "supports",
    "builds on",
    "challenges",
    "exemplifies",
    "answers",
    "similar to",
    "leads to",
    "contrasts",
    "relates to",
)

# Fixed rendering order for the seven assessment dimensions.
DIMENSIONS: tuple[str, ...] = (
    "climate",
    "communication",
    "compatibility",
    "conflict",
    "context",
    "contribution",
    "constructive",
)

ARTIFACT_KINDS: tuple[str, ...] = ("transcript", "concept_map", "assessment")

MAX_LABEL_CHARS = 120
MAX_RENDERED_DESCRIPTION_CHARS = 400


def dimension_display(dimension: str) -> str:
    """Capitalized display form of a dimension token ("climate" -> "Climate")."""
    return dimension.capitalize()


def parse_timestamp(value: str) -> datetime:
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Session:
    """A single meeting event containing one or more group discussions."""

    session_id: str
    title: str
    started_at: datetime
    discussion_ids: tuple[str, ...] = ()
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Discussion:
    """One group's conversation within a session."""

    discussion_id: str
    session_id: str
    group_label: str = ""
    duration_ms: int = 0


@dataclass(frozen=True)
class Utterance:
    index: int
    speaker_id: str
    start_ms: int
    end_ms: int
    text: str


@dataclass(frozen=True)
class Transcript:
    discussion_id: str
    utterances: tuple[Utterance, ...]

    def full_text(self) -> str:
        return " ".join(u.text for u in self.utterances)


@dataclass(frozen=True)
class ConceptNode:
    node_id: str
    label: str
    node_type: str
    description: str = ""
    source_utterance_indices: tuple[int, ...] = ()
    speaker_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConceptEdge:
    edge_id: str
    source: str
    target: str
    edge_type: str
    rationale: str = ""


@dataclass(frozen=True)
class ConceptMap:
    discussion_id: str
    nodes: tuple[ConceptNode, ...]
    edges: tuple[ConceptEdge, ...]
    generated_at: datetime
    provider_tag: str = ""


@dataclass(frozen=True)
class EvidenceAnchor:
    """Resolved link from an evidence excerpt to a transcript utterance.

    ``utterance_index`` is None when no utterance reached the anchoring
    similarity threshold; the excerpt is then flagged as unanchored but
    never dropped.
    """

    excerpt: str
    utterance_index: int | None
    match_score: float


@dataclass(frozen=True)
class DimensionAssessment:
    dimension: str
    score: int
    analysis: str
    key_evidence: tuple[str, ...] = ()
    evidence_anchors: tuple[EvidenceAnchor, ...] | None = None


@dataclass(frozen=True)
class SevenCAssessment:
    discussion_id: str
    dimensions: tuple[DimensionAssessment, ...]
    generated_at: datetime
    provider_tag: str = ""

    def dimension(self, name: str) -> DimensionAssessment:
        for d in self.dimensions:
            if d.dimension == name:
                return d
        raise KeyError(name)


@dataclass(frozen=True)
class PsycholinguisticSeries:
    """Per-utterance metric rows; one row per utterance, one column per metric."""

    discussion_id: str
    metric_names: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_transcript(transcript: Transcript, known_speakers: set[str] | None = None) -> list[str]:
    """Return transcript invariant violations; unknown speakers are warnings, not errors."""
    errors: list[str] = []
    if not transcript.utterances:
        errors.append("empty-transcript: at least one utterance is required")
    for pos, utt in enumerate(transcript.utterances):
        if utt.index != pos:
            errors.append(f"bad-utterance-ordering: index {utt.index} at position {pos}")
        if utt.start_ms < 0 or utt.end_ms < 0:
            errors.append(f"negative-timestamp: utterance {utt.index}")
        if utt.end_ms < utt.start_ms:
            errors.append(f"end-before-start: utterance {utt.index}")
        if not utt.text.strip():
            errors.append(f"empty-utterance-text: utterance {utt.index}")
    return errors


def transcript_speaker_warnings(transcript: Transcript, known_speakers: set[str]) -> list[str]:
    unknown = sorted({u.speaker_id for u in transcript.utterances} - known_speakers)
    return [f"unknown-speaker: {s!r} not in the registered participant set" for s in unknown]


def validate_concept_map(cmap: ConceptMap, transcript: Transcript | None = None) -> list[str]:
    """Return all concept-map invariant violations (empty list means valid).

    When ``transcript`` is given, node source_utterance_indices are checked
    against it; otherwise only structural invariants are checked.
    """
    errors: list[str] = []
    node_ids: set[str] = set()
    for node in cmap.nodes:
        if not node.node_id:
            errors.append("missing-node-id: node with empty id")
        if node.node_id in node_ids:
            errors.append(f"duplicate-node-id: {node.node_id!r}")
        node_ids.add(node.node_id)
        if node.node_type not in NODE_TYPES:
            errors.append(f"unknown-node-type: node {node.node_id!r} has type {node.node_type!r}")
        if len(node.label) > MAX_LABEL_CHARS:
            errors.append(f"label-too-long: node {node.node_id!r} ({len(node.label)} chars)")
        if transcript is not None:
            n = len(transcript.utterances)
            for idx in node.source_utterance_indices:
                if not 0 <= idx < n:
                    errors.append(f"bad-utterance-index: node {node.node_id!r} references utterance {idx}")
    edge_ids: set[str] = set()
    for edge in cmap.edges:
        if edge.edge_id in edge_ids:
            errors.append(f"duplicate-edge-id: {edge.edge_id!r}")
        edge_ids.add(edge.edge_id)
        if edge.edge_type not in EDGE_TYPES:
            errors.append(f"unknown-edge-type: edge {edge.edge_id!r} has type {edge.edge_type!r}")
        if edge.source == edge.target:
            errors.append(f"self-edge: edge {edge.edge_id!r}")
        for endpoint in (edge.source, edge.target):
            if endpoint not in node_ids:
                errors.append(f"dangling-edge: edge {edge.edge_id!r} references missing node {endpoint!r}")
    return errors


def validate_assessment(assessment: SevenCAssessment) -> list[str]:
    """Return all assessment invariant violations (empty list means valid)."""
    errors: list[str] = []
    seen: list[str] = []
    for dim in assessment.dimensions:
        if dim.dimension not in DIMENSIONS:
            errors.append(f"unknown-dimension: {dim.dimension!r}")
            continue
        if dim.dimension in seen:
            errors.append(f"duplicate-dimension: {dimension_display(dim.dimension)}")
        seen.append(dim.dimension)
        if not isinstance(dim.score, int) or isinstance(dim.score, bool):
            errors.append(f"non-integer-score: {dimension_display(dim.dimension)}")
        elif not 0 <= dim.score <= 100:
            errors.append(f"score-out-of-range: {dimension_display(dim.dimension)} score {dim.score}")
        if not dim.analysis.strip():
            errors.append(f"empty-analysis: {dimension_display(dim.dimension)}")
        if dim.evidence_anchors is not None and len(dim.evidence_anchors) != len(dim.key_evidence):
            errors.append(f"anchor-count-mismatch: {dimension_display(dim.dimension)}")
    for name in DIMENSIONS:
        if name not in seen:
            errors.append(f"missing-dimension: {dimension_display(name)}")
    return errors


# ---------------------------------------------------------------------------
# Text serialization (the exact strings that get embedded)
# ---------------------------------------------------------------------------


def serialize_transcript_text(transcript: Transcript) -> str:
    """Deterministic line-per-utterance rendering used for indexing."""
    lines = [f"transcript of discussion {transcript.discussion_id}"]
    lines.extend(f"{u.speaker_id}: {u.text}" for u in transcript.utterances)
    return "\n".join(lines) + "\n"


def serialize_concept_map_text(cmap: ConceptMap) -> str:
    """Deterministic line-oriented rendering of a concept map.

    One line per node (``[type] label — description``) followed by one line
    per edge (``label --edge_type--> label``).  Rejects invalid maps.
    """
    errors = validate_concept_map(cmap)
    if errors:
        raise ArtifactValidationError("cannot serialize invalid concept map", errors)
    labels = {n.node_id: n.label for n in cmap.nodes}
    lines = [
        f"concept map for discussion {cmap.discussion_id}",
        f"nodes: {len(cmap.nodes)} | edges: {len(cmap.edges)}",
    ]
    for node in cmap.nodes:
        line = f"[{node.node_type}] {node.label}"
        if node.description:
            line += f" — {truncate_text(node.description, MAX_RENDERED_DESCRIPTION_CHARS)}"
        lines.append(line)
    for edge in cmap.edges:
        lines.append(f"{labels[edge.source]} --{edge.edge_type}--> {labels[edge.target]}")
    return "\n".join(lines) + "\n"


def serialize_assessment_text(assessment: SevenCAssessment) -> str:
    """Deterministic rendering of an assessment in the fixed dimension order."""
    errors = validate_assessment(assessment)
    if errors:
        raise ArtifactValidationError("cannot serialize invalid assessment", errors)
    by_name = {d.dimension: d for d in assessment.dimensions}
    lines = [f"collaboration assessment for discussion {assessment.discussion_id}"]
    for name in DIMENSIONS:
        dim = by_name[name]
        lines.append(f"{dimension_display(name)} ({dim.score}/100):")
        lines.append(dim.analysis)
        if dim.key_evidence:
            lines.append("evidence:")
            lines.extend(f"- {e}" for e in dim.key_evidence)
        else:
            lines.append("evidence: (no key evidence)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON codecs
# ---------------------------------------------------------------------------


def _require(payload: dict, key: str, kind: str) -> Any:
    if not isinstance(payload, dict) or key not in payload:
        raise ArtifactValidationError(f"{kind}: missing field {key!r}")
    return payload[key]


def session_to_dict(s: Session) -> dict[str, Any]:
    return {
        "session_id": s.session_id,
        "title": s.title,
        "started_at": format_timestamp(s.started_at),
        "discussion_ids": list(s.discussion_ids),
        "metadata": dict(s.metadata),
    }


def session_from_dict(d: dict[str, Any]) -> Session:
    return Session(
        session_id=str(_require(d, "session_id", "session")),
        title=str(d.get("title", "")),
        started_at=parse_timestamp(_require(d, "started_at", "session")),
        discussion_ids=tuple(d.get("discussion_ids", [])),
        metadata={str(k): str(v) for k, v in d.get("metadata", {}).items()},
    )


def discussion_to_dict(d: Discussion) -> dict[str, Any]:
    return {
        "discussion_id": d.discussion_id,
        "session_id": d.session_id,
        "group_label": d.group_label,
        "duration_ms": d.duration_ms,
    }


def discussion_from_dict(d: dict[str, Any]) -> Discussion:
    return Discussion(
        discussion_id=str(_require(d, "discussion_id", "discussion")),
        session_id=str(_require(d, "session_id", "discussion")),
        group_label=str(d.get("group_label", "")),
        duration_ms=int(d.get("duration_ms", 0)),
    )


def utterance_to_dict(u: Utterance) -> dict[str, Any]:
    return {
        "index": u.index,
        "speaker_id": u.speaker_id,
        "start_ms": u.start_ms,
        "end_ms": u.end_ms,
        "text": u.text,
    }


def utterance_from_dict(d: dict[str, Any]) -> Utterance:
    return Utterance(
        index=int(_require(d, "index", "utterance")),
        speaker_id=str(_require(d, "speaker_id", "utterance")),
        start_ms=int(_require(d, "start_ms", "utterance")),
        end_ms=int(_require(d, "end_ms", "utterance")),
        text=str(_require(d, "text", "utterance")),
    )


def transcript_to_dict(t: Transcript) -> dict[str, Any]:
    return {
        "discussion_id": t.discussion_id,
        "utterances": [utterance_to_dict(u) for u in t.utterances],
    }


def transcript_from_dict(d: dict[str, Any]) -> Transcript:
    return Transcript(
        discussion_id=str(_require(d, "discussion_id", "transcript")),
        utterances=tuple(utterance_from_dict(u) for u in _require(d, "utterances", "transcript")),
    )


def concept_map_to_dict(m: ConceptMap) -> dict[str, Any]:
    return {
        "discussion_id": m.discussion_id,
        "nodes": [
            {
                "node_id": n.node_id,
                "label": n.label,
                "node_type": n.node_type,
                "description": n.description,
                "source_utterance_indices": list(n.source_utterance_indices),
                "speaker_ids": list(n.speaker_ids),
            }
            for n in m.nodes
        ],
        "edges": [
            {
                "edge_id": e.edge_id,
                "source": e.source,
                "target": e.target,
                "edge_type": e.edge_type,
                "rationale": e.rationale,
            }
            for e in m.edges
        ],
        "generated_at": format_timestamp(m.generated_at),
        "provider_tag": m.provider_tag,
    }


def concept_map_from_dict(d: dict[str, Any]) -> ConceptMap:
    nodes = tuple(
        ConceptNode(
            node_id=str(_require(n, "node_id", "concept node")),
            label=str(_require(n, "label", "concept node")),
            node_type=str(_require(n, "node_type", "concept node")),
            description=str(n.get("description", "")),
            source_utterance_indices=tuple(int(i) for i in n.get("source_utterance_indices", [])),
            speaker_ids=tuple(str(s) for s in n.get("speaker_ids", [])),
        )
        for n in _require(d, "nodes", "concept map")
    )
    edges = tuple(
        ConceptEdge(
            edge_id=str(_require(e, "edge_id", "concept edge")),
            source=str(_require(e, "source", "concept edge")),
            target=str(_require(e, "target", "concept edge")),
            edge_type=str(_require(e, "edge_type", "concept edge")),
            rationale=str(e.get("rationale", "")),
        )
        for e in _require(d, "edges", "concept map")
    )
    return ConceptMap(
        discussion_id=str(_require(d, "discussion_id", "concept map")),
        nodes=nodes,
        edges=edges,
        generated_at=parse_timestamp(_require(d, "generated_at", "concept map")),
        provider_tag=str(d.get("provider_tag", "")),
    )


def anchor_to_dict(a: EvidenceAnchor) -> dict[str, Any]:
    return {
        "excerpt": a.excerpt,
        "utterance_index": a.utterance_index,
        "match_score": a.match_score,
    }


def anchor_from_dict(d: dict[str, Any]) -> EvidenceAnchor:
    idx = d.get("utterance_index")
    return EvidenceAnchor(
        excerpt=str(_require(d, "excerpt", "evidence anchor")),
        utterance_index=None if idx is None else int(idx),
        match_score=float(_require(d, "match_score", "evidence anchor")),
    )


def assessment_to_dict(a: SevenCAssessment) -> dict[str, Any]:
    dims = []
    for dim in a.dimensions:
        entry: dict[str, Any] = {
            "dimension": dim.dimension,
            "score": dim.score,
            "analysis": dim.analysis,
            "key_evidence": list(dim.key_evidence),
        }
        if dim.evidence_anchors is not None:
            entry["evidence_anchors"] = [anchor_to_dict(x) for x in dim.evidence_anchors]
        dims.append(entry)
    return {
        "discussion_id": a.discussion_id,
        "dimensions": dims,
        "generated_at": format_timestamp(a.generated_at),
        "provider_tag": a.provider_tag,
    }


def assessment_from_dict(d: dict[str, Any]) -> SevenCAssessment:
    dims = []
    for entry in _require(d, "dimensions", "assessment"):
        anchors = entry.get("evidence_anchors")
        dims.append(
            DimensionAssessment(
                dimension=str(_require(entry, "dimension", "dimension assessment")),
                score=int(_require(entry, "score", "dimension assessment")),
                analysis=str(_require(entry, "analysis", "dimension assessment")),
                key_evidence=tuple(str(e) for e in entry.get("key_evidence", [])),
                evidence_anchors=None if anchors is None else tuple(anchor_from_dict(x) for x in anchors),
            )
        )
    return SevenCAssessment(
        discussion_id=str(_require(d, "discussion_id", "assessment")),
        dimensions=tuple(dims),
        generated_at=parse_timestamp(_require(d, "generated_at", "assessment")),
        provider_tag=str(d.get("provider_tag", "")),
    )


def series_to_dict(s: PsycholinguisticSeries) -> dict[str, Any]:
    return {
        "discussion_id": s.discussion_id,
        "metric_names": list(s.metric_names),
        "values": [list(row) for row in s.values],
    }


def series_from_dict(d: dict[str, Any]) -> PsycholinguisticSeries:
    return PsycholinguisticSeries(
        discussion_id=str(_require(d, "discussion_id", "metric series")),
        metric_names=tuple(str(n) for n in _require(d, "metric_names", "metric series")),
        values=tuple(tuple(float(v) for v in row) for row in _require(d, "values", "metric series")),
    )
