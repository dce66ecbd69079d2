"""Synthetic vocabulary-gap corpus for retrieval evaluation.

Builds an indexed corpus where analytical-query vocabulary is absent from
transcripts: evaluative terms appear only in assessment documents and
epistemic-structure terms only in the concept maps of the discussions they
describe, while every transcript sticks to casual discussion language plus
a per-discussion topic token.  Analytical queries (evaluative + epistemic
phrases) therefore miss under transcript-only retrieval and hit once the
artifact collections are searchable; direct queries use topic tokens that
appear in every collection, so they are stable across configurations.
"""

from __future__ import annotations

import numpy as np

from .embedding import MockEmbeddingProvider
from .index import ArtifactIndex
from .retrieval_eval import RetrievalEvalCase

CASUAL_TOKENS = (
    "okay so we could try that again maybe start with the first part "
    "and then see what happens next because it did not work last time "
    "let me check this line here yeah right guess should just run "
    "it once more look at result before changing anything else "
    "wait about other one hmm sure sounds fine honestly"
).split()

# 60 distinct evaluative terms; each analytical query owns three of them,
# and they appear nowhere outside assessment documents.
EVALUATIVE_TOKENS = (
    "communication quality collaboration constructive productive conflict resolution "
    "contribution balance climate supportive mutual learning effective synthesis "
    "interpersonal dynamics equitable facilitation engagement cohesion rapport "
    "reflective integration coordination consensus negotiation accountability "
    "inclusive scaffolding metacognition elaboration turn-taking reciprocity "
    "receptiveness listening empathy trust leadership followership ownership "
    "alignment grounding repair uptake responsiveness initiative perseverance "
    "adaptability transparency respect fairness participation depth breadth "
    "momentum focus clarity openness curiosity rigor"
).split()

# 40 distinct epistemic-structure terms; each analytical query owns two,
# and they appear only in the concept maps of its relevant discussions.
EPISTEMIC_TOKENS = (
    "hypothesis conclusion assumption mechanism tradeoff premise inference "
    "alternative constraint criterion taxonomy causal linkage dependency "
    "abstraction decomposition iteration counterexample generalization analogy "
    "refinement contradiction justification derivation estimation validation "
    "extrapolation classification correlation boundary invariant heuristic "
    "formulation enumeration approximation falsification triangulation "
    "operationalization parsimony emergence recursion"
).split()

ASSESSMENT_FILLER = (
    "the group worked through the task while members took turns speaking "
    "and moved between subtopics during the conversation at several points"
).split()


def _pick_topic_tokens(n: int, dimension: int) -> list[str]:
    """Deterministic topic tokens whose hash buckets collide with nothing else.

    The mock embedder is bag-of-words over hashed buckets, so a topic token
    sharing a bucket with another topic (or any pool word) would leak
    similarity between unrelated documents and poison the ground truth.
    """
    from .textutil import stable_hash64

    used = {
        stable_hash64(tok) % dimension
        for tok in (*CASUAL_TOKENS, *EVALUATIVE_TOKENS, *EPISTEMIC_TOKENS, *ASSESSMENT_FILLER)
    }
    topics: list[str] = []
    i = 0
    while len(topics) < n:
        candidate = f"topic{i:03d}"
        bucket = stable_hash64(candidate) % dimension
        if bucket not in used:
            used.add(bucket)
            topics.append(candidate)
        i += 1
    return topics


def build_vocabulary_gap_corpus(
    n_discussions: int = 30,
    n_direct: int = 10,
    n_analytical: int = 20,
    seed: int = 7,
    dimension: int = 256,
) -> tuple[ArtifactIndex, list[RetrievalEvalCase]]:
    """Return an index over ``n_discussions`` synthetic discussions plus eval cases."""
    if n_analytical * 3 > len(EVALUATIVE_TOKENS) or n_analytical * 2 > len(EPISTEMIC_TOKENS):
        raise ValueError("not enough disjoint query vocabulary for that many analytical queries")
    rng = np.random.default_rng(seed)
    embedder = MockEmbeddingProvider(dimension=dimension)
    index = ArtifactIndex(embedder)

    from .config import DETERMINISTIC_INSTANT

    ids = [f"d{i:02d}" for i in range(n_discussions)]
    topics = dict(zip(ids, _pick_topic_tokens(n_discussions, dimension)))

    # Analytical queries: globally disjoint evaluative/epistemic phrases, each
    # owned by one query and injected only into its relevant discussions'
    # assessment (evaluative) and concept-map (epistemic) texts.
    evaluative_order = list(rng.permutation(EVALUATIVE_TOKENS))
    epistemic_order = list(rng.permutation(EPISTEMIC_TOKENS))
    analytical: list[RetrievalEvalCase] = []
    assessment_extras: dict[str, list[str]] = {d: [] for d in ids}
    concept_extras: dict[str, list[str]] = {d: [] for d in ids}
    for q in range(n_analytical):
        phrase = evaluative_order[q * 3 : q * 3 + 3]
        structure = epistemic_order[q * 2 : q * 2 + 2]
        relevant = [ids[i] for i in rng.choice(n_discussions, size=int(rng.integers(2, 5)), replace=False)]
        for d in relevant:
            assessment_extras[d].extend(phrase * 3)
            concept_extras[d].extend(structure * 3)
        analytical.append(
            RetrievalEvalCase(
                query=" ".join(phrase + structure),
                category="analytical",
                relevant=frozenset(relevant),
            )
        )

    direct: list[RetrievalEvalCase] = []
    for _ in range(n_direct):
        relevant = [ids[i] for i in rng.choice(n_discussions, size=int(rng.integers(2, 4)), replace=False)]
        query = " ".join(topics[d] for d in relevant)
        direct.append(RetrievalEvalCase(query=query, category="direct", relevant=frozenset(relevant)))

    for d in ids:
        topic = topics[d]
        casual = list(rng.choice(CASUAL_TOKENS, size=30, replace=True))
        transcript_text = " ".join(casual) + (" " + topic) * 8
        concept_text = (
            "concept map about "
            + (topic + " ") * 8
            + " ".join(rng.choice(CASUAL_TOKENS, size=6, replace=True))
            + " "
            + " ".join(concept_extras[d])
        )
        assessment_text = (
            " ".join(ASSESSMENT_FILLER)
            + " "
            + (topic + " ") * 8
            + " ".join(assessment_extras[d])
        )
        index.index_artifact(d, "transcript", transcript_text, DETERMINISTIC_INSTANT)
        index.index_artifact(d, "concept_map", concept_text, DETERMINISTIC_INSTANT)
        index.index_artifact(d, "assessment", assessment_text, DETERMINISTIC_INSTANT)

    return index, direct + analytical
