"""Binds store, index, providers and config into one runnable system.

The workspace owns the mutation discipline: ingest and generation
serialize per discussion (a process-wide lock at this corpus scale), every
artifact is persisted then indexed as one logical step, and an indexing
failure rolls the artifact file back so the store and index never disagree
after a command finishes.
"""

from __future__ import annotations

import logging
import threading
from datetime import datetime
from pathlib import Path

from .agent import AgentConfig, AgentTrace, ToolHost, run_agent
from .config import AppConfig, Clock
from .embedding import EmbeddingProvider, HttpEmbeddingProvider, MockEmbeddingProvider
from .errors import StoreError
from .jsonio import atomic_write_bytes
from .generation import generate_assessment, generate_concept_map
from .index import ArtifactIndex, FusedHit, FusionConfig
from .model import (
    ARTIFACT_KINDS,
    ConceptMap,
    Discussion,
    PsycholinguisticSeries,
    Session,
    SevenCAssessment,
    Transcript,
    Utterance,
    serialize_assessment_text,
    serialize_concept_map_text,
    serialize_transcript_text,
    transcript_speaker_warnings,
    validate_transcript,
)
from .providers import (
    GenerationProvider,
    HttpGenerationProvider,
    MockGenerationProvider,
)
from .psycholing import DictionaryConfig, compute_psycholinguistics, default_dictionary
from .store import ARTIFACT_FILENAMES, Store

logger = logging.getLogger(__name__)


def default_chat_script(query: str) -> list[dict]:
    """Canonical two-step script used when chatting with the mock provider."""
    return [
        {
            "action": "tools",
            "reasoning": "Search the indexed discussions for evidence relevant to the query.",
            "tool_calls": [{"tool": "search_sessions", "arguments": {"query": query}}],
        },
        {"action": "finish", "reasoning": "Search results gathered; enough evidence to answer."},
    ]


class Workspace:
    def __init__(
        self,
        root: Path,
        config: AppConfig | None = None,
        clock: Clock | None = None,
        embedder: EmbeddingProvider | None = None,
        generation_provider: GenerationProvider | None = None,
        dictionary: DictionaryConfig | None = None,
    ):
        self.root = Path(root)
        self.config = config or AppConfig()
        self.clock = clock or self.config.clock()
        self.store = Store(self.root)
        self.embedder = embedder or self._build_embedder()
        self._generation_provider = generation_provider
        self.dictionary = dictionary or self._build_dictionary()
        self.index = ArtifactIndex.load(self.store.index_dir, self.embedder)
        self._write_lock = threading.Lock()

    # -- wiring ----------------------------------------------------------------

    def _build_embedder(self) -> EmbeddingProvider:
        emb = self.config.embedding
        if emb.endpoint:
            return HttpEmbeddingProvider(emb.endpoint, dimension=emb.dimension, api_key=emb.api_key)
        return MockEmbeddingProvider(dimension=emb.dimension)

    def _build_dictionary(self) -> DictionaryConfig:
        if self.config.dictionaries:
            return DictionaryConfig.from_file(Path(self.config.dictionaries))
        return default_dictionary()

    def generation_provider(self, chat_query: str | None = None) -> GenerationProvider:
        """Provider for one unit of work; mock chat runs get a fresh scripted instance."""
        if self._generation_provider is not None:
            return self._generation_provider
        gen = self.config.generation
        if gen.endpoint:
            return HttpGenerationProvider(gen.endpoint, model_tag=gen.model_tag, api_key=gen.api_key)
        if chat_query is not None:
            return MockGenerationProvider(agent_script=default_chat_script(chat_query))
        return MockGenerationProvider()

    # -- ingestion ----------------------------------------------------------------

    def create_session(
        self,
        session_id: str,
        title: str = "",
        started_at: datetime | None = None,
        metadata: dict[str, str] | None = None,
    ) -> Session:
        if self.store.session_exists(session_id):
            session, _ = self.store.load_session(session_id)
            return session
        session = Session(
            session_id=session_id,
            title=title or session_id,
            started_at=started_at or self.clock.now(),
            discussion_ids=(),
            metadata=metadata or {},
        )
        self.store.save_session(session, [])
        return session

    def ingest_transcript(
        self,
        utterance_records: list[dict],
        session_id: str,
        discussion_id: str,
        group_label: str = "",
        duration_ms: int | None = None,
    ) -> Discussion:
        """Validate, persist and index a transcript; replaces any previous version."""
        if not self.store.session_exists(session_id):
            raise StoreError(f"unknown session {session_id!r}; create it first")
        with self._write_lock:
            records = list(utterance_records)
            starts = [r.get("start_ms", 0) for r in records]
            if any(b < a for a, b in zip(starts, starts[1:])):
                logger.warning("%s: out-of-order timestamps; reordering by start_ms", discussion_id)
                records.sort(key=lambda r: int(r.get("start_ms", 0)))
            utterances = tuple(
                Utterance(
                    index=i,
                    speaker_id=str(r["speaker_id"]),
                    start_ms=int(r["start_ms"]),
                    end_ms=int(r["end_ms"]),
                    text=str(r["text"]),
                )
                for i, r in enumerate(records)
            )
            transcript = Transcript(discussion_id=discussion_id, utterances=utterances)
            errors = validate_transcript(transcript)
            if errors:
                raise StoreError(f"invalid transcript for {discussion_id!r}: " + "; ".join(errors))

            session, discussions = self.store.load_session(session_id)
            registered = session.metadata.get("participants")
            if registered:
                known = {s.strip() for s in registered.split(",") if s.strip()}
                for warning in transcript_speaker_warnings(transcript, known):
                    logger.warning("%s: %s", discussion_id, warning)

            duration = duration_ms if duration_ms is not None else max(u.end_ms for u in utterances)
            discussion = Discussion(
                discussion_id=discussion_id,
                session_id=session_id,
                group_label=group_label,
                duration_ms=duration,
            )
            discussions = [d for d in discussions if d.discussion_id != discussion_id] + [discussion]
            discussions.sort(key=lambda d: d.discussion_id)
            ids = tuple(d.discussion_id for d in discussions)
            session = Session(
                session_id=session.session_id,
                title=session.title,
                started_at=session.started_at,
                discussion_ids=ids,
                metadata=session.metadata,
            )
            self.store.save_session(session, discussions)
            self._persist_and_index(
                session_id,
                discussion_id,
                "transcript",
                lambda: self.store.write_transcript(session_id, transcript),
                serialize_transcript_text(transcript),
            )
            return discussion

    def ingest_transcript_file(self, path: Path, session_id: str, discussion_id: str, **kwargs) -> Discussion:
        """Ingest a JSONL file (one ``{speaker_id, start_ms, end_ms, text}`` object per line)."""
        import json as _json

        records = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = _json.loads(line)
                except _json.JSONDecodeError as exc:
                    raise StoreError(f"{path}: parse error on line {line_no}: {exc}") from exc
                missing = {"speaker_id", "start_ms", "end_ms", "text"} - set(record)
                if missing:
                    raise StoreError(f"{path}: line {line_no} missing fields {sorted(missing)}")
                records.append(record)
        return self.ingest_transcript(records, session_id, discussion_id, **kwargs)

    # -- artifact generation -----------------------------------------------------

    def generate_artifacts(
        self, discussion_id: str, provider: GenerationProvider | None = None
    ) -> tuple[ConceptMap, SevenCAssessment, PsycholinguisticSeries]:
        """Generate, persist and index all three artifact products for a discussion.

        Each artifact is persisted-and-indexed atomically; a failure leaves
        that artifact (and everything after it) at its prior state.
        """
        with self._write_lock:
            session, _ = self.store.find_discussion(discussion_id)
            transcript = self.store.read_transcript(discussion_id)
            provider = provider or self.generation_provider()

            cmap = generate_concept_map(transcript, provider, generated_at=self.clock.now())
            self._persist_and_index(
                session.session_id,
                discussion_id,
                "concept_map",
                lambda: self.store.write_concept_map(session.session_id, cmap),
                serialize_concept_map_text(cmap),
            )

            assessment = generate_assessment(transcript, provider, generated_at=self.clock.now())
            self._persist_and_index(
                session.session_id,
                discussion_id,
                "assessment",
                lambda: self.store.write_assessment(session.session_id, assessment),
                serialize_assessment_text(assessment),
            )

            series = compute_psycholinguistics(transcript, self.dictionary)
            self.store.write_metrics(session.session_id, series)
            return cmap, assessment, series

    def _persist_and_index(self, session_id: str, discussion_id: str, kind: str, write_artifact, index_text: str) -> None:
        """Persist one artifact then index it; any failure restores the prior state.

        The artifact file and its index entry change together or not at all,
        which is what keeps the doctor's store/index coherence check green
        after injected faults.
        """
        path = self.store.sessions_dir / session_id / discussion_id / ARTIFACT_FILENAMES[kind]
        prior_bytes = path.read_bytes() if path.exists() else None
        prior_doc = self.index.get(discussion_id, kind)
        write_artifact()
        try:
            self.index.index_artifact(discussion_id, kind, index_text, indexed_at=self.clock.now())
            self.index.save(self.store.index_dir)
        except BaseException:
            try:
                if prior_bytes is None:
                    path.unlink(missing_ok=True)
                else:
                    atomic_write_bytes(path, prior_bytes)
                if prior_doc is not None:
                    self.index.restore(prior_doc)
                else:
                    self.index.remove(discussion_id, kind)
                self.index.save(self.store.index_dir)
            except OSError:
                logger.exception("rollback cleanup failed for %s/%s", discussion_id, kind)
            raise

    def rebuild_index(self) -> int:
        """Re-embed every stored artifact from scratch; returns the document count."""
        with self._write_lock:
            fresh = ArtifactIndex(self.embedder)
            count = 0
            for _session, discussions in self.store.list_sessions():
                for d in discussions:
                    try:
                        transcript = self.store.read_transcript(d.discussion_id)
                    except StoreError:
                        continue
                    fresh.index_artifact(
                        d.discussion_id, "transcript", serialize_transcript_text(transcript), self.clock.now()
                    )
                    count += 1
                    cmap = self.store.read_concept_map(d.discussion_id)
                    if cmap is not None:
                        fresh.index_artifact(
                            d.discussion_id, "concept_map", serialize_concept_map_text(cmap), self.clock.now()
                        )
                        count += 1
                    assessment = self.store.read_assessment(d.discussion_id)
                    if assessment is not None:
                        fresh.index_artifact(
                            d.discussion_id, "assessment", serialize_assessment_text(assessment), self.clock.now()
                        )
                        count += 1
            self.index = fresh
            self.index.save(self.store.index_dir)
            return count

    # -- queries -------------------------------------------------------------------

    def search(self, query: str, cfg: FusionConfig | None = None) -> list[FusedHit]:
        cfg = cfg or FusionConfig(rrf_k=self.config.rrf_k, top_n=self.config.top_n)
        return self.index.search_sessions(query, cfg)

    def chat(
        self,
        query: str,
        allowed_kinds: tuple[str, ...] | None = None,
        baseline_mode: bool = False,
        provider: GenerationProvider | None = None,
    ) -> AgentTrace:
        kinds = ("transcript",) if baseline_mode else (allowed_kinds or ARTIFACT_KINDS)
        cfg = AgentConfig(
            allowed_kinds=kinds,
            baseline_mode=baseline_mode,
            fusion=FusionConfig(rrf_k=self.config.rrf_k, top_n=self.config.top_n, allowed_kinds=kinds),
        )
        provider = provider or self.generation_provider(chat_query=query)
        return run_agent(query, cfg, provider, ToolHost(self))

    def speaker_profile(self, speaker_id: str):
        from .agent import compute_speaker_profile

        return compute_speaker_profile(speaker_id, self)

    def doctor(self) -> list[str]:
        return self.store.doctor(self.index)


def open_workspace(root: Path, config_path: Path | None = None) -> Workspace:
    """Open a workspace rooted at ``root``; config comes from config.json or the given path."""
    from .config import load_config

    root = Path(root)
    cfg_file = Path(config_path) if config_path else root / "config.json"
    config = load_config(cfg_file if cfg_file.exists() else None)
    return Workspace(root, config=config)
