from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from groupsight.config import AppConfig, FixedClock
from groupsight.model import Transcript, Utterance
from groupsight.workspace import Workspace

FIXED_TIME = datetime(2026, 1, 1, tzinfo=timezone.utc)


@pytest.fixture
def sample_transcript() -> Transcript:
    return Transcript(
        discussion_id="d1",
        utterances=(
            Utterance(0, "alice", 0, 4000, "I think we should map the plan first. What data do we even have?"),
            Utterance(1, "bob", 4000, 9000, "The budget plan covers three quarters."),
            Utterance(2, "alice", 9000, 15000, "Surely we can test the model today."),
        ),
    )


@pytest.fixture
def sample_records() -> list[dict]:
    return [
        {"speaker_id": "alice", "start_ms": 0, "end_ms": 4000, "text": "I think we should map the plan first. What data do we even have?"},
        {"speaker_id": "bob", "start_ms": 4000, "end_ms": 9000, "text": "The budget plan covers three quarters."},
        {"speaker_id": "alice", "start_ms": 9000, "end_ms": 15000, "text": "Surely we can test the model today."},
    ]


@pytest.fixture
def workspace(tmp_path) -> Workspace:
    return Workspace(tmp_path / "store", config=AppConfig(), clock=FixedClock(FIXED_TIME))


@pytest.fixture
def populated_workspace(workspace, sample_records) -> Workspace:
    """Two sessions / three discussions, artifacts generated for d1 and d2."""
    workspace.create_session("s1", title="Workshop A", metadata={"participants": "alice,bob"})
    workspace.create_session("s2", title="Workshop B")
    workspace.ingest_transcript(sample_records, "s1", "d1", group_label="g1")
    workspace.ingest_transcript(
        [
            {"speaker_id": "carol", "start_ms": 0, "end_ms": 3000, "text": "Let us sketch the robot arm design."},
            {"speaker_id": "dave", "start_ms": 3000, "end_ms": 8000, "text": "The gripper torque seems too low for the payload."},
        ],
        "s1",
        "d2",
        group_label="g2",
    )
    workspace.ingest_transcript(
        [
            {"speaker_id": "alice", "start_ms": 0, "end_ms": 5000, "text": "Today we compare the two policy drafts."},
            {"speaker_id": "erin", "start_ms": 5000, "end_ms": 9000, "text": "Draft two funds the library program fully."},
        ],
        "s2",
        "d3",
    )
    workspace.generate_artifacts("d1")
    workspace.generate_artifacts("d2")
    return workspace
