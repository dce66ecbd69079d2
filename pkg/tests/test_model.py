"""Domain types: validation, text serialization, JSON round trips."""

from __future__ import annotations

import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupsight.errors import ArtifactValidationError
from groupsight.model import (
    ARTIFACT_KINDS,
    DIMENSIONS,
    EDGE_TYPES,
    NODE_TYPES,
    ConceptEdge,
    ConceptMap,
    ConceptNode,
    DimensionAssessment,
    EvidenceAnchor,
    SevenCAssessment,
    Transcript,
    Utterance,
    assessment_from_dict,
    assessment_to_dict,
    concept_map_from_dict,
    concept_map_to_dict,
    serialize_assessment_text,
    serialize_concept_map_text,
    serialize_transcript_text,
    transcript_from_dict,
    transcript_to_dict,
    validate_assessment,
    validate_concept_map,
    validate_transcript,
)

TS = datetime(2026, 1, 1, tzinfo=timezone.utc)


def make_map(nodes, edges) -> ConceptMap:
    return ConceptMap(discussion_id="d1", nodes=tuple(nodes), edges=tuple(edges), generated_at=TS, provider_tag="mock")


def make_assessment(dimensions) -> SevenCAssessment:
    return SevenCAssessment(discussion_id="d1", dimensions=tuple(dimensions), generated_at=TS, provider_tag="mock")


def full_dimensions(scores=None):
    scores = scores or [70] * 7
    return [
        DimensionAssessment(dim, score, f"Analysis of {dim} patterns.", ())
        for dim, score in zip(DIMENSIONS, scores)
    ]


class TestVocabularies:
    def test_exact_sizes(self):
        assert len(NODE_TYPES) == 10
        assert len(EDGE_TYPES) == 9
        assert len(DIMENSIONS) == 7
        assert ARTIFACT_KINDS == ("transcript", "concept_map", "assessment")

    def test_spaced_vocabulary_members(self):
        assert "builds on" in EDGE_TYPES
        assert "similar to" in EDGE_TYPES
        assert "relates to" in EDGE_TYPES


class TestValidateConceptMap:
    def test_conforming_map(self, sample_transcript):
        cmap = make_map(
            [ConceptNode("n1", "A", "idea", "", (0,)), ConceptNode("n2", "B", "question")],
            [ConceptEdge("e1", "n1", "n2", "builds on")],
        )
        assert validate_concept_map(cmap, sample_transcript) == []

    def test_unknown_node_type_rejected(self, sample_transcript):
        cmap = make_map([ConceptNode("n1", "A", "opinion")], [])
        errors = validate_concept_map(cmap, sample_transcript)
        assert any(e.startswith("unknown-node-type") for e in errors)

    def test_dangling_edge_rejected(self, sample_transcript):
        cmap = make_map([ConceptNode("n1", "A", "idea")], [ConceptEdge("e1", "n1", "missing", "supports")])
        errors = validate_concept_map(cmap, sample_transcript)
        assert any(e.startswith("dangling-edge") for e in errors)

    def test_self_edge_and_duplicates(self, sample_transcript):
        cmap = make_map(
            [ConceptNode("n1", "A", "idea"), ConceptNode("n1", "B", "idea")],
            [ConceptEdge("e1", "n1", "n1", "supports")],
        )
        errors = validate_concept_map(cmap, sample_transcript)
        assert any(e.startswith("duplicate-node-id") for e in errors)
        assert any(e.startswith("self-edge") for e in errors)

    def test_bad_utterance_index(self, sample_transcript):
        cmap = make_map([ConceptNode("n1", "A", "idea", "", (99,))], [])
        errors = validate_concept_map(cmap, sample_transcript)
        assert any(e.startswith("bad-utterance-index") for e in errors)

    def test_every_invalid_node_type_string_is_rejected(self, sample_transcript):
        # Fuzz corpus: near-misses of the closed vocabulary.
        for bad in ["opinion", "Idea", "ideas", "IDEA", "concept", "claim", " idea", "idea ", "", "contradicts"]:
            cmap = make_map([ConceptNode("n1", "A", bad)], [])
            assert any(e.startswith("unknown-node-type") for e in validate_concept_map(cmap, sample_transcript)), bad

    def test_every_invalid_edge_type_string_is_rejected(self, sample_transcript):
        nodes = [ConceptNode("n1", "A", "idea"), ConceptNode("n2", "B", "idea")]
        for bad in ["contradicts", "buildson", "builds-on", "Builds on", "BUILDS ON", "supports ", "", "related to"]:
            cmap = make_map(nodes, [ConceptEdge("e1", "n1", "n2", bad)])
            assert any(e.startswith("unknown-edge-type") for e in validate_concept_map(cmap, sample_transcript)), bad


class TestValidateAssessment:
    def test_in_range_scores_valid(self):
        # Integer in-range example scores used throughout the suite.
        a = make_assessment(full_dimensions([78, 78, 69, 53, 63, 67, 69]))
        assert validate_assessment(a) == []

    def test_missing_dimension(self):
        dims = [d for d in full_dimensions() if d.dimension != "conflict"]
        errors = validate_assessment(make_assessment(dims))
        assert "missing-dimension: Conflict" in errors

    def test_score_out_of_range(self):
        dims = full_dimensions([101, 70, 70, 70, 70, 70, 70])
        errors = validate_assessment(make_assessment(dims))
        assert any(e.startswith("score-out-of-range") for e in errors)

    def test_duplicate_dimension(self):
        dims = full_dimensions() + [DimensionAssessment("climate", 50, "again", ())]
        errors = validate_assessment(make_assessment(dims))
        assert any(e.startswith("duplicate-dimension") for e in errors)

    def test_unknown_dimension_rejected(self):
        for bad in ["Climate ", "climat", "warmth", "", "CLIMATE"]:
            dims = full_dimensions()[:-1] + [DimensionAssessment(bad, 50, "x", ())]
            assert any(
                e.startswith(("unknown-dimension", "missing-dimension"))
                for e in validate_assessment(make_assessment(dims))
            ), bad


class TestValidateTranscript:
    def test_valid(self, sample_transcript):
        assert validate_transcript(sample_transcript) == []

    def test_end_before_start(self):
        t = Transcript("d1", (Utterance(0, "a", 100, 50, "hi"),))
        assert any(e.startswith("end-before-start") for e in validate_transcript(t))

    def test_empty_transcript(self):
        assert any(e.startswith("empty-transcript") for e in validate_transcript(Transcript("d1", ())))


class TestSerializeConceptMapText:
    def test_empty_map_header_only(self):
        text = serialize_concept_map_text(make_map([], []))
        assert text == "concept map for discussion d1\nnodes: 0 | edges: 0\n"

    def test_single_node(self):
        text = serialize_concept_map_text(make_map([ConceptNode("n1", "A", "idea")], []))
        assert text.count("\n") == 3
        assert "[idea] A" in text

    def test_rendering_grammar_golden(self):
        cmap = make_map(
            [
                ConceptNode("n1", "Budget planning", "idea", "Plan the budget across quarters", (0,), ("alice",)),
                ConceptNode("n2", "Is the data complete?", "question", "", (0,), ("alice",)),
            ],
            [ConceptEdge("e1", "n1", "n2", "builds on", "the question refines the idea")],
        )
        assert serialize_concept_map_text(cmap) == (
            "concept map for discussion d1\n"
            "nodes: 2 | edges: 1\n"
            "[idea] Budget planning — Plan the budget across quarters\n"
            "[question] Is the data complete?\n"
            "Budget planning --builds on--> Is the data complete?\n"
        )

    def test_invalid_map_rejected(self):
        with pytest.raises(ArtifactValidationError):
            serialize_concept_map_text(make_map([ConceptNode("n1", "A", "opinion")], []))

    def test_identical_maps_byte_identical(self):
        cmap = make_map([ConceptNode("n1", "A", "idea", "desc")], [])
        assert serialize_concept_map_text(cmap) == serialize_concept_map_text(cmap)


class TestSerializeAssessmentText:
    def test_no_evidence_marker(self):
        text = serialize_assessment_text(make_assessment(full_dimensions()))
        assert text.count("(no key evidence)") == 7

    def test_determinism(self):
        a = make_assessment(full_dimensions())
        assert serialize_assessment_text(a) == serialize_assessment_text(a)

    def test_dimension_order_fixed(self):
        # Definition order regardless of input order.
        a = make_assessment(list(reversed(full_dimensions())))
        text = serialize_assessment_text(a)
        positions = [text.index(f"{d.capitalize()} (") for d in DIMENSIONS]
        assert positions == sorted(positions)

    def test_golden_rendering(self):
        dims = [
            DimensionAssessment(dim, 60 + i, f"Analysis of {dim} patterns.", ("some excerpt",) if i % 2 == 0 else ())
            for i, dim in enumerate(DIMENSIONS)
        ]
        text = serialize_assessment_text(make_assessment(dims))
        assert text.startswith(
            "collaboration assessment for discussion d1\n"
            "Climate (60/100):\n"
            "Analysis of climate patterns.\n"
            "evidence:\n"
            "- some excerpt\n"
            "Communication (61/100):\n"
        )
        assert text.endswith("Constructive (66/100):\nAnalysis of constructive patterns.\nevidence:\n- some excerpt\n")

    def test_invalid_assessment_rejected(self):
        with pytest.raises(ArtifactValidationError):
            serialize_assessment_text(make_assessment(full_dimensions()[:6]))


def test_serialize_transcript_text(sample_transcript):
    text = serialize_transcript_text(sample_transcript)
    assert text.splitlines()[0] == "transcript of discussion d1"
    assert len(text.splitlines()) == 4


# ---------------------------------------------------------------------------
# Round trips over random valid instances
# ---------------------------------------------------------------------------

ids = st.text(alphabet="abcdefghij0123456789", min_size=1, max_size=8)
short_text = st.text(min_size=0, max_size=40).filter(lambda s: "\n" not in s)


@st.composite
def transcripts(draw):
    n = draw(st.integers(1, 6))
    utterances = []
    t = 0
    for i in range(n):
        dur = draw(st.integers(0, 5000))
        utterances.append(
            Utterance(i, draw(ids), t, t + dur, draw(st.text(min_size=1, max_size=30)))
        )
        t += dur
    return Transcript(discussion_id=draw(ids), utterances=tuple(utterances))


@st.composite
def concept_maps(draw):
    n_nodes = draw(st.integers(0, 5))
    nodes = tuple(
        ConceptNode(
            node_id=f"n{i}",
            label=draw(st.text(min_size=1, max_size=40)),
            node_type=draw(st.sampled_from(NODE_TYPES)),
            description=draw(short_text),
            source_utterance_indices=tuple(draw(st.lists(st.integers(0, 3), max_size=2))),
            speaker_ids=tuple(draw(st.lists(ids, max_size=2))),
        )
        for i in range(n_nodes)
    )
    edges = []
    if n_nodes >= 2:
        for j in range(draw(st.integers(0, 4))):
            a, b = draw(st.sampled_from([(x, y) for x in range(n_nodes) for y in range(n_nodes) if x != y]))
            edges.append(
                ConceptEdge(f"e{j}", f"n{a}", f"n{b}", draw(st.sampled_from(EDGE_TYPES)), draw(short_text))
            )
    return make_map(nodes, edges)


@st.composite
def assessments(draw):
    dims = []
    for dim in DIMENSIONS:
        evidence = tuple(draw(st.lists(st.text(min_size=1, max_size=30), max_size=2)))
        anchors = None
        if draw(st.booleans()):
            anchors = tuple(
                EvidenceAnchor(e, draw(st.one_of(st.none(), st.integers(0, 5))), draw(st.floats(0, 1)))
                for e in evidence
            )
        dims.append(
            DimensionAssessment(
                dimension=dim,
                score=draw(st.integers(0, 100)),
                analysis=draw(st.text(min_size=1, max_size=60)),
                key_evidence=evidence,
                evidence_anchors=anchors,
            )
        )
    return make_assessment(dims)


@settings(max_examples=50)
@given(transcripts())
def test_transcript_round_trip(t):
    assert transcript_from_dict(json.loads(json.dumps(transcript_to_dict(t)))) == t


@settings(max_examples=50)
@given(concept_maps())
def test_concept_map_round_trip(m):
    assert concept_map_from_dict(json.loads(json.dumps(concept_map_to_dict(m)))) == m


@settings(max_examples=50)
@given(assessments())
def test_assessment_round_trip(a):
    assert assessment_from_dict(json.loads(json.dumps(assessment_to_dict(a)))) == a


@settings(max_examples=25)
@given(concept_maps())
def test_concept_map_serialization_pure(m):
    assert serialize_concept_map_text(m) == serialize_concept_map_text(m)
