"""File-per-artifact persistence.

Layout under the store root:

    sessions/<session_id>/meta.json
    sessions/<session_id>/<discussion_id>/transcript.jsonl
    sessions/<session_id>/<discussion_id>/concept_map.json
    sessions/<session_id>/<discussion_id>/assessment.json
    sessions/<session_id>/<discussion_id>/metrics.json
    index/<collection>.snap
    config.json

All writes go through atomic temp-file + rename, so a killed process never
leaves a half-written artifact readable.  The corpus is tens of
discussions; plain JSON files keep everything transparent and diffable.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .errors import StoreError
from .jsonio import atomic_write_text, canonical_json, canonical_json_line, read_json
from .model import (
    ConceptMap,
    Discussion,
    PsycholinguisticSeries,
    Session,
    Transcript,
    assessment_from_dict,
    assessment_to_dict,
    concept_map_from_dict,
    concept_map_to_dict,
    discussion_from_dict,
    discussion_to_dict,
    series_from_dict,
    series_to_dict,
    session_from_dict,
    session_to_dict,
    utterance_from_dict,
    utterance_to_dict,
    validate_assessment,
    validate_concept_map,
    validate_transcript,
    SevenCAssessment,
)

logger = logging.getLogger(__name__)

ARTIFACT_FILENAMES = {
    "transcript": "transcript.jsonl",
    "concept_map": "concept_map.json",
    "assessment": "assessment.json",
    "metrics": "metrics.json",
}


class Store:
    def __init__(self, root: Path):
        self.root = Path(root)

    @property
    def sessions_dir(self) -> Path:
        return self.root / "sessions"

    @property
    def index_dir(self) -> Path:
        return self.root / "index"

    # -- sessions ------------------------------------------------------------

    def save_session(self, session: Session, discussions: list[Discussion]) -> None:
        payload = {
            "session": session_to_dict(session),
            "discussions": [discussion_to_dict(d) for d in discussions],
        }
        atomic_write_text(self.sessions_dir / session.session_id / "meta.json", canonical_json(payload))

    def load_session(self, session_id: str) -> tuple[Session, list[Discussion]]:
        path = self.sessions_dir / session_id / "meta.json"
        if not path.exists():
            raise StoreError(f"unknown session {session_id!r}")
        data = read_json(path)
        return (
            session_from_dict(data["session"]),
            [discussion_from_dict(d) for d in data.get("discussions", [])],
        )

    def session_exists(self, session_id: str) -> bool:
        return (self.sessions_dir / session_id / "meta.json").exists()

    def list_sessions(self) -> list[tuple[Session, list[Discussion]]]:
        if not self.sessions_dir.exists():
            return []
        out = []
        for meta in sorted(self.sessions_dir.glob("*/meta.json")):
            out.append(self.load_session(meta.parent.name))
        return out

    def find_discussion(self, discussion_id: str) -> tuple[Session, Discussion]:
        for session, discussions in self.list_sessions():
            for d in discussions:
                if d.discussion_id == discussion_id:
                    return session, d
        raise StoreError(f"unknown discussion {discussion_id!r}")

    def discussion_dir(self, discussion_id: str) -> Path:
        session, _ = self.find_discussion(discussion_id)
        return self.sessions_dir / session.session_id / discussion_id

    def artifact_path(self, discussion_id: str, kind: str) -> Path:
        return self.discussion_dir(discussion_id) / ARTIFACT_FILENAMES[kind]

    # -- transcripts -----------------------------------------------------------

    def write_transcript(self, session_id: str, transcript: Transcript) -> None:
        lines = [canonical_json_line(utterance_to_dict(u)) for u in transcript.utterances]
        path = self.sessions_dir / session_id / transcript.discussion_id / "transcript.jsonl"
        atomic_write_text(path, "\n".join(lines) + "\n")

    def read_transcript(self, discussion_id: str) -> Transcript:
        path = self.artifact_path(discussion_id, "transcript")
        if not path.exists():
            raise StoreError(f"no transcript stored for {discussion_id!r}")
        utterances = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    utterances.append(utterance_from_dict(json.loads(line)))
                except (json.JSONDecodeError, ValueError) as exc:
                    raise StoreError(f"{path}: parse error on line {line_no}: {exc}") from exc
        return Transcript(discussion_id=discussion_id, utterances=tuple(utterances))

    # -- generated artifacts ---------------------------------------------------

    def write_concept_map(self, session_id: str, cmap: ConceptMap) -> None:
        path = self.sessions_dir / session_id / cmap.discussion_id / "concept_map.json"
        atomic_write_text(path, canonical_json(concept_map_to_dict(cmap)))

    def read_concept_map(self, discussion_id: str) -> ConceptMap | None:
        path = self.artifact_path(discussion_id, "concept_map")
        if not path.exists():
            return None
        return concept_map_from_dict(read_json(path))

    def write_assessment(self, session_id: str, assessment: SevenCAssessment) -> None:
        path = self.sessions_dir / session_id / assessment.discussion_id / "assessment.json"
        atomic_write_text(path, canonical_json(assessment_to_dict(assessment)))

    def read_assessment(self, discussion_id: str) -> SevenCAssessment | None:
        path = self.artifact_path(discussion_id, "assessment")
        if not path.exists():
            return None
        return assessment_from_dict(read_json(path))

    def write_metrics(self, session_id: str, series: PsycholinguisticSeries) -> None:
        path = self.sessions_dir / session_id / series.discussion_id / "metrics.json"
        atomic_write_text(path, canonical_json(series_to_dict(series)))

    def read_metrics(self, discussion_id: str) -> PsycholinguisticSeries | None:
        path = self.artifact_path(discussion_id, "metrics")
        if not path.exists():
            return None
        return series_from_dict(read_json(path))

    # -- health ---------------------------------------------------------------

    def doctor(self, index=None) -> list[str]:
        """Return store (and optionally index) consistency problems; [] when healthy."""
        problems: list[str] = []
        transcripts: set[str] = set()
        concept_maps: set[str] = set()
        assessments: set[str] = set()

        for session, discussions in self._iter_sessions_safe(problems):
            declared = {d.discussion_id for d in discussions}
            if len(declared) != len(discussions):
                problems.append(f"session {session.session_id!r}: duplicate discussion ids in meta")
            session_dir = self.sessions_dir / session.session_id
            on_disk = {p.name for p in session_dir.iterdir() if p.is_dir()}
            for stray in sorted(on_disk - declared):
                problems.append(f"session {session.session_id!r}: directory {stray!r} not declared in meta")
            for d in discussions:
                ddir = session_dir / d.discussion_id
                has_transcript = (ddir / "transcript.jsonl").exists()
                if has_transcript:
                    try:
                        transcript = self.read_transcript(d.discussion_id)
                        errors = validate_transcript(transcript)
                        if errors:
                            problems.append(f"{d.discussion_id}: invalid transcript: {errors[0]}")
                        else:
                            transcripts.add(d.discussion_id)
                    except StoreError as exc:
                        problems.append(str(exc))
                for kind, reader, validator, bucket in (
                    ("concept_map", self.read_concept_map, None, concept_maps),
                    ("assessment", self.read_assessment, validate_assessment, assessments),
                    ("metrics", self.read_metrics, None, None),
                ):
                    path = ddir / ARTIFACT_FILENAMES[kind]
                    if not path.exists():
                        continue
                    if not has_transcript:
                        problems.append(f"{d.discussion_id}: orphan {kind} artifact (no transcript)")
                        continue
                    try:
                        artifact = reader(d.discussion_id)
                    except Exception as exc:
                        problems.append(f"{d.discussion_id}: unreadable {kind} artifact: {exc}")
                        continue
                    if kind == "concept_map":
                        errors = validate_concept_map(artifact, self.read_transcript(d.discussion_id))
                        if errors:
                            problems.append(f"{d.discussion_id}: invalid concept map: {errors[0]}")
                            continue
                    elif validator is not None:
                        errors = validator(artifact)
                        if errors:
                            problems.append(f"{d.discussion_id}: invalid {kind}: {errors[0]}")
                            continue
                    if bucket is not None:
                        bucket.add(d.discussion_id)

        if index is not None:
            for kind, stored in (
                ("transcript", transcripts),
                ("concept_map", concept_maps),
                ("assessment", assessments),
            ):
                indexed = {doc.discussion_id for doc in index.documents(kind)}
                for missing in sorted(stored - indexed):
                    problems.append(f"{missing}: stored {kind} has no index entry")
                for stale in sorted(indexed - stored):
                    problems.append(f"{stale}: indexed {kind} has no stored artifact")
        return problems

    def _iter_sessions_safe(self, problems: list[str]):
        if not self.sessions_dir.exists():
            return
        for meta in sorted(self.sessions_dir.glob("*/meta.json")):
            try:
                yield self.load_session(meta.parent.name)
            except Exception as exc:
                problems.append(f"unreadable session meta {meta}: {exc}")
