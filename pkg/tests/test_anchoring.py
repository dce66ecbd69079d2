"""Evidence anchoring against transcripts."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupsight.anchoring import ANCHOR_THRESHOLD, anchor_evidence
from groupsight.errors import GroupsightError
from groupsight.kernels import levenshtein_similarity
from groupsight.model import Transcript, Utterance
from groupsight.textutil import normalize_for_match

from oracles import levenshtein_oracle


def test_verbatim_excerpt_scores_one(sample_transcript):
    anchor = anchor_evidence("The budget plan covers three quarters.", sample_transcript)
    assert anchor.utterance_index == 1
    assert anchor.match_score == 1.0


def test_normalization_case_and_whitespace(sample_transcript):
    anchor = anchor_evidence("THE budget  plan", sample_transcript)
    assert anchor.utterance_index == 1
    assert anchor.match_score == 1.0


def test_absent_excerpt_below_threshold(sample_transcript):
    excerpt = "completely unrelated sentence about volcanoes erupting overnight"
    anchor = anchor_evidence(excerpt, sample_transcript)
    # Independent edit-distance oracle computes the best similarity.
    best = max(
        1.0
        - levenshtein_oracle(normalize_for_match(excerpt), normalize_for_match(u.text))
        / max(len(normalize_for_match(excerpt)), len(normalize_for_match(u.text)))
        for u in sample_transcript.utterances
    )
    assert best < ANCHOR_THRESHOLD
    assert anchor.utterance_index is None
    assert anchor.match_score == pytest.approx(best, abs=1e-12)


def test_near_match_above_threshold_anchors(sample_transcript):
    anchor = anchor_evidence("the budget plan covers three quarterz", sample_transcript)
    assert anchor.utterance_index == 1
    assert ANCHOR_THRESHOLD <= anchor.match_score < 1.0


def test_tie_broken_by_lowest_index():
    t = Transcript(
        "d1",
        (Utterance(0, "a", 0, 1, "the same words"), Utterance(1, "b", 1, 2, "the same words")),
    )
    anchor = anchor_evidence("same words", t)
    assert anchor.utterance_index == 0


def test_empty_transcript_errors():
    with pytest.raises(GroupsightError):
        anchor_evidence("anything", Transcript("d1", ()))


def test_unmatchable_excerpt_errors(sample_transcript):
    with pytest.raises(GroupsightError):
        anchor_evidence("?!...", sample_transcript)


def test_threshold_boundary_exact():
    # Similarity exactly at the threshold anchors (>= comparison).
    t = Transcript("d1", (Utterance(0, "a", 0, 1, "abcdefghij"),))
    excerpt = "abcdefghxx"  # distance 2 over length 10 -> similarity 0.8
    assert levenshtein_similarity(excerpt, "abcdefghij") == pytest.approx(0.8)
    anchor = anchor_evidence(excerpt, t)
    assert anchor.utterance_index == 0
    assert anchor.match_score == pytest.approx(0.8)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_substring_excerpt_always_scores_one(data):
    texts = [
        "we should refine the hypothesis before the demo",
        "maybe the sensor data was mislabeled on Tuesday",
        "I agree, let us split the analysis work",
    ]
    utterances = tuple(Utterance(i, "s", i, i + 1, t) for i, t in enumerate(texts))
    transcript = Transcript("dx", utterances)
    which = data.draw(st.integers(0, len(texts) - 1))
    text = texts[which]
    start = data.draw(st.integers(0, len(text) - 2))
    end = data.draw(st.integers(start + 1, len(text)))
    excerpt = text[start:end]
    if not normalize_for_match(excerpt):
        return
    anchor = anchor_evidence(excerpt, transcript)
    assert anchor.match_score == 1.0
    assert anchor.utterance_index is not None
