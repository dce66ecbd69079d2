"""Persistence, ingestion, artifact generation wiring, crash safety, doctor."""

from __future__ import annotations

import json
import os

import pytest

from groupsight.errors import GenerationFailedError, StoreError
from groupsight.jsonio import atomic_write_text
from groupsight.model import ARTIFACT_KINDS
from groupsight.providers import MockGenerationProvider
from groupsight.store import Store


class TestIngest:
    def test_three_line_fixture(self, workspace, sample_records):
        workspace.create_session("s1")
        discussion = workspace.ingest_transcript(sample_records, "s1", "d1")
        assert discussion.discussion_id == "d1"
        transcript = workspace.store.read_transcript("d1")
        assert len(transcript.utterances) == 3
        assert transcript.utterances[0].index == 0
        assert discussion.duration_ms == 15000

    def test_requires_existing_session(self, workspace, sample_records):
        with pytest.raises(StoreError):
            workspace.ingest_transcript(sample_records, "ghost", "d1")

    def test_duplicate_ingest_replaces(self, workspace, sample_records):
        workspace.create_session("s1")
        workspace.ingest_transcript(sample_records, "s1", "d1")
        workspace.ingest_transcript(sample_records[:1], "s1", "d1")
        assert len(workspace.store.read_transcript("d1").utterances) == 1
        assert workspace.index.count("transcript") == 1
        _session, discussions = workspace.store.load_session("s1")
        assert [d.discussion_id for d in discussions] == ["d1"]

    def test_out_of_order_timestamps_reordered(self, workspace, caplog):
        workspace.create_session("s1")
        records = [
            {"speaker_id": "a", "start_ms": 5000, "end_ms": 6000, "text": "second"},
            {"speaker_id": "b", "start_ms": 0, "end_ms": 1000, "text": "first"},
        ]
        with caplog.at_level("WARNING"):
            workspace.ingest_transcript(records, "s1", "d1")
        assert any("out-of-order" in r.message for r in caplog.records)
        transcript = workspace.store.read_transcript("d1")
        assert [u.text for u in transcript.utterances] == ["first", "second"]

    def test_malformed_line_names_line_number(self, workspace, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(
            '{"speaker_id": "a", "start_ms": 0, "end_ms": 1, "text": "ok"}\n{broken json\n',
            encoding="utf-8",
        )
        workspace.create_session("s1")
        with pytest.raises(StoreError, match="line 2"):
            workspace.ingest_transcript_file(path, "s1", "d1")

    def test_missing_fields_named(self, workspace, tmp_path):
        path = tmp_path / "short.jsonl"
        path.write_text('{"speaker_id": "a", "text": "no times"}\n', encoding="utf-8")
        workspace.create_session("s1")
        with pytest.raises(StoreError, match="line 1"):
            workspace.ingest_transcript_file(path, "s1", "d1")

    def test_unknown_speaker_warns_not_errors(self, workspace, sample_records, caplog):
        workspace.create_session("s1", metadata={"participants": "alice"})
        with caplog.at_level("WARNING"):
            workspace.ingest_transcript(sample_records, "s1", "d1")
        assert any("unknown-speaker" in r.message for r in caplog.records)
        assert workspace.store.read_transcript("d1") is not None

    def test_transcript_jsonl_field_names(self, workspace, sample_records):
        workspace.create_session("s1")
        workspace.ingest_transcript(sample_records, "s1", "d1")
        line = (workspace.root / "sessions" / "s1" / "d1" / "transcript.jsonl").read_text().splitlines()[0]
        assert set(json.loads(line)) == {"index", "speaker_id", "start_ms", "end_ms", "text"}


class TestGenerateArtifacts:
    def test_three_files_and_indexed_documents(self, workspace, sample_records):
        workspace.create_session("s1")
        workspace.ingest_transcript(sample_records, "s1", "d1")
        workspace.generate_artifacts("d1")
        ddir = workspace.root / "sessions" / "s1" / "d1"
        for name in ("concept_map.json", "assessment.json", "metrics.json"):
            assert (ddir / name).exists()
        assert workspace.index.get("d1", "concept_map") is not None
        assert workspace.index.get("d1", "assessment") is not None
        assert sum(workspace.index.count(k) for k in ARTIFACT_KINDS) == 3

    def test_regeneration_replaces(self, workspace, sample_records):
        workspace.create_session("s1")
        workspace.ingest_transcript(sample_records, "s1", "d1")
        first = workspace.generate_artifacts("d1")
        second = workspace.generate_artifacts("d1")
        assert first[0] == second[0]
        assert workspace.index.count("concept_map") == 1

    def test_generation_requires_transcript(self, workspace):
        workspace.create_session("s1")
        with pytest.raises(StoreError):
            workspace.generate_artifacts("d1")

    def test_provider_failure_before_anything_leaves_store_unchanged(self, workspace, sample_records):
        workspace.create_session("s1")
        workspace.ingest_transcript(sample_records, "s1", "d1")
        provider = MockGenerationProvider(fail_next=10)
        with pytest.raises(GenerationFailedError):
            workspace.generate_artifacts("d1", provider=provider)
        ddir = workspace.root / "sessions" / "s1" / "d1"
        assert not (ddir / "concept_map.json").exists()
        assert workspace.index.count("concept_map") == 0
        assert workspace.doctor() == []

    def test_failure_midway_keeps_prior_artifact_state(self, workspace, sample_records):
        workspace.create_session("s1")
        workspace.ingest_transcript(sample_records, "s1", "d1")
        # Concept map succeeds (1 provider call), assessment generation fails.
        provider = MockGenerationProvider()
        original_dispatch = provider._dispatch

        def failing_dispatch(request):
            if request.prompt_kind == "assessment":
                from groupsight.errors import ProviderTransportError

                raise ProviderTransportError("injected")
            return original_dispatch(request)

        provider._dispatch = failing_dispatch
        with pytest.raises(GenerationFailedError):
            workspace.generate_artifacts("d1", provider=provider)
        ddir = workspace.root / "sessions" / "s1" / "d1"
        assert (ddir / "concept_map.json").exists()  # completed step persists
        assert not (ddir / "assessment.json").exists()  # failed step untouched
        assert not (ddir / "metrics.json").exists()
        assert workspace.doctor() == []

    def test_index_failure_rolls_back_artifact_file(self, workspace, sample_records, monkeypatch):
        workspace.create_session("s1")
        workspace.ingest_transcript(sample_records, "s1", "d1")

        def boom(*args, **kwargs):
            raise OSError("disk full")

        monkeypatch.setattr(workspace.index, "save", boom)
        with pytest.raises(OSError):
            workspace.generate_artifacts("d1")
        monkeypatch.undo()
        ddir = workspace.root / "sessions" / "s1" / "d1"
        assert not (ddir / "concept_map.json").exists()
        assert workspace.index.count("concept_map") == 0
        assert workspace.doctor() == []


class TestAtomicWrites:
    def test_interrupted_write_leaves_target_intact(self, tmp_path, monkeypatch):
        target = tmp_path / "artifact.json"
        atomic_write_text(target, "old content")

        real_replace = os.replace

        def crash_replace(src, dst):
            raise OSError("killed mid-rename")

        monkeypatch.setattr(os, "replace", crash_replace)
        with pytest.raises(OSError):
            atomic_write_text(target, "new content")
        monkeypatch.setattr(os, "replace", real_replace)
        assert target.read_text() == "old content"

    def test_no_partial_file_visible(self, tmp_path):
        target = tmp_path / "fresh.json"
        atomic_write_text(target, "data")
        leftovers = [p for p in tmp_path.iterdir() if p.name != "fresh.json"]
        assert leftovers == []


class TestDoctor:
    def test_healthy_store(self, populated_workspace):
        assert populated_workspace.doctor() == []

    def test_orphan_artifact_flagged(self, populated_workspace):
        ddir = populated_workspace.root / "sessions" / "s1" / "d1"
        (ddir / "transcript.jsonl").unlink()
        problems = populated_workspace.doctor()
        assert any("orphan" in p for p in problems)

    def test_unindexed_artifact_flagged(self, populated_workspace):
        populated_workspace.index.remove("d1", "assessment")
        problems = populated_workspace.doctor()
        assert any("no index entry" in p for p in problems)

    def test_stale_index_entry_flagged(self, populated_workspace):
        (populated_workspace.root / "sessions" / "s1" / "d1" / "assessment.json").unlink()
        problems = populated_workspace.doctor()
        assert any("orphan" in p or "no stored artifact" in p or "no index entry" in p for p in problems)

    def test_corrupt_artifact_flagged(self, populated_workspace):
        path = populated_workspace.root / "sessions" / "s1" / "d1" / "concept_map.json"
        path.write_text("{1 not json", encoding="utf-8")
        problems = populated_workspace.doctor()
        assert any("unreadable" in p for p in problems)

    def test_undeclared_directory_flagged(self, populated_workspace):
        (populated_workspace.root / "sessions" / "s1" / "dZ").mkdir()
        problems = populated_workspace.doctor()
        assert any("not declared" in p for p in problems)


class TestRebuildIndex:
    def test_rebuild_matches_incremental(self, populated_workspace):
        before = {
            kind: [(d.discussion_id, d.text) for d in populated_workspace.index.documents(kind)]
            for kind in ARTIFACT_KINDS
        }
        count = populated_workspace.rebuild_index()
        after = {
            kind: [(d.discussion_id, d.text) for d in populated_workspace.index.documents(kind)]
            for kind in ARTIFACT_KINDS
        }
        assert before == after
        assert count == sum(len(v) for v in before.values())
        assert populated_workspace.doctor() == []


class TestStoreRoundTrip:
    def test_artifacts_reload_equal(self, populated_workspace):
        store: Store = populated_workspace.store
        cmap = store.read_concept_map("d1")
        assessment = store.read_assessment("d1")
        series = store.read_metrics("d1")
        fresh = Store(populated_workspace.root)
        assert fresh.read_concept_map("d1") == cmap
        assert fresh.read_assessment("d1") == assessment
        assert fresh.read_metrics("d1") == series

    def test_find_discussion(self, populated_workspace):
        session, discussion = populated_workspace.store.find_discussion("d3")
        assert session.session_id == "s2"
        assert discussion.discussion_id == "d3"
        with pytest.raises(StoreError):
            populated_workspace.store.find_discussion("dX")
