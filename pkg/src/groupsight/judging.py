"""Paired-assessment judging and embedding similarity of analysis texts.

A judge provider receives two analyses of the same dimension (presentation
order randomized per run) and rates behavioral alignment and evidence
correspondence on a 1-5 scale; scores are averaged across runs.
"""

from __future__ import annotations

import logging
from typing import NamedTuple

import numpy as np

from .embedding import EmbeddingProvider, cosine
from .errors import ArtifactValidationError
from .jsonio import canonical_json_line
from .model import SevenCAssessment, dimension_display
from .providers import GenerationProvider, GenerationRequest, call_with_retries, schema_errors

logger = logging.getLogger(__name__)

JUDGE_SYSTEM_TEXT = (
    "You compare two independent analysts' write-ups of the same collaboration "
    "dimension for the same discussion. Rate two criteria, each on a 1-5 scale:\n"
    "1. behavioral_alignment — do the two analyses identify the same collaborative "
    "behaviors and arrive at similar conclusions?\n"
    "2. evidence_correspondence — do the two analyses draw on similar moments of "
    "the discussion?\n"
    "An empty key_evidence list means the analyst found insufficient evidence for "
    "the dimension; when both analysts conclude this in agreement, treat it as "
    "agreement rather than missing data.\n"
    'Respond with a single JSON object: {"behavioral_alignment": int, '
    '"evidence_correspondence": int}'
)


class JudgePairResult(NamedTuple):
    behavioral_alignment: float
    evidence_correspondence: float


def _judge_request(dimension: str, first, second) -> GenerationRequest:
    body = {
        "dimension": dimension,
        "analyst_1": {"analysis": first.analysis, "key_evidence": list(first.key_evidence)},
        "analyst_2": {"analysis": second.analysis, "key_evidence": list(second.key_evidence)},
    }
    return GenerationRequest(
        prompt_kind="judge_pair",
        system_text=JUDGE_SYSTEM_TEXT,
        user_text=canonical_json_line(body),
        schema_id="judge_pair_v1",
    )


def _score_errors(payload) -> list[str]:
    errors = schema_errors("judge_pair_v1", payload)
    if errors:
        return errors
    for key in ("behavioral_alignment", "evidence_correspondence"):
        if not 1 <= payload[key] <= 5:
            errors.append(f"score-out-of-range: {key} = {payload[key]}")
    return errors


def judge_pair(
    assessment_a: SevenCAssessment,
    assessment_b: SevenCAssessment,
    dimension: str,
    provider: GenerationProvider,
    runs: int = 3,
    seed: int = 0,
) -> JudgePairResult:
    """Average judge scores over ``runs`` order-randomized comparisons.

    Out-of-range provider scores are re-prompted once per run before the
    comparison is rejected.
    """
    dim_a = assessment_a.dimension(dimension)
    dim_b = assessment_b.dimension(dimension)
    rng = np.random.default_rng(seed)

    behavioral, evidence = [], []
    for _ in range(runs):
        flipped = bool(rng.integers(0, 2))
        first, second = (dim_b, dim_a) if flipped else (dim_a, dim_b)
        request = _judge_request(dimension, first, second)
        response = call_with_retries(provider, request)
        payload = response.payload()
        errors = _score_errors(payload)
        if errors:
            logger.info("judge scores rejected, re-prompting once: %s", errors)
            retry = GenerationRequest(
                prompt_kind="judge_pair",
                system_text=request.system_text,
                user_text=request.user_text
                + "\n\nYour previous scores were invalid: "
                + "; ".join(errors)
                + ". Scores must be integers from 1 to 5.",
                schema_id="judge_pair_v1",
            )
            response = call_with_retries(provider, retry)
            payload = response.payload()
            errors = _score_errors(payload)
            if errors:
                raise ArtifactValidationError(
                    f"judge produced invalid scores for {dimension_display(dimension)}",
                    errors,
                    raw_text=response.raw_text,
                )
        behavioral.append(float(payload["behavioral_alignment"]))
        evidence.append(float(payload["evidence_correspondence"]))

    return JudgePairResult(
        behavioral_alignment=sum(behavioral) / len(behavioral),
        evidence_correspondence=sum(evidence) / len(evidence),
    )


def cosine_text_similarity(a: str, b: str, embedder: EmbeddingProvider) -> float:
    """Cosine similarity between the embeddings of two texts."""
    return cosine(embedder.embed(a), embedder.embed(b))
