"""Resolve assessment evidence excerpts to transcript utterances.

Matching runs over normalized text (lowercased, punctuation stripped,
whitespace collapsed).  A direct substring hit anchors with score 1.0;
otherwise the utterance with the highest normalized Levenshtein similarity
wins, and the anchor is left without an utterance index when that best
similarity falls below the threshold.
"""

from __future__ import annotations

from .errors import GroupsightError
from .kernels import levenshtein_similarity
from .model import EvidenceAnchor, Transcript
from .textutil import normalize_for_match

ANCHOR_THRESHOLD = 0.8


def anchor_evidence(excerpt: str, transcript: Transcript, threshold: float = ANCHOR_THRESHOLD) -> EvidenceAnchor:
    """Anchor one evidence excerpt; ties between equally good utterances go to the lowest index."""
    if not transcript.utterances:
        raise GroupsightError("cannot anchor evidence against an empty transcript")
    normalized_excerpt = normalize_for_match(excerpt)
    if not normalized_excerpt:
        raise GroupsightError("evidence excerpt has no matchable content")

    normalized_utterances = [normalize_for_match(u.text) for u in transcript.utterances]
    for idx, text in enumerate(normalized_utterances):
        if normalized_excerpt in text:
            return EvidenceAnchor(excerpt=excerpt, utterance_index=idx, match_score=1.0)

    best_idx = 0
    best_score = -1.0
    for idx, text in enumerate(normalized_utterances):
        score = levenshtein_similarity(normalized_excerpt, text)
        if score > best_score:
            best_idx, best_score = idx, score
    if best_score >= threshold:
        return EvidenceAnchor(excerpt=excerpt, utterance_index=best_idx, match_score=best_score)
    return EvidenceAnchor(excerpt=excerpt, utterance_index=None, match_score=best_score)
