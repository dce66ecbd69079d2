"""Dictionary-based per-utterance psycholinguistic metrics.

A dictionary config names word-stem categories and composite metrics.
Per utterance, a category scores 100 * matched_tokens / tokens (0 for an
empty token list); a composite is an affine combination of category scores
clamped to [0, 100].  A token matches a category when it equals one of the
stems or starts with one (stem "certain" matches "certainly").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ArtifactValidationError
from .jsonio import read_json
from .model import PsycholinguisticSeries, Transcript
from .textutil import tokenize


@dataclass(frozen=True)
class CompositeMetric:
    constant: float
    weights: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class DictionaryConfig:
    """Category stem sets plus composite metric definitions, in a stable order."""

    categories: dict[str, frozenset[str]]
    composites: dict[str, CompositeMetric] = field(default_factory=dict)

    def __post_init__(self):
        errors = []
        for name, stems in self.categories.items():
            for stem in stems:
                if stem != stem.lower():
                    errors.append(f"non-lowercase-stem: {stem!r} in category {name!r}")
        for name, comp in self.composites.items():
            if name in self.categories:
                errors.append(f"duplicate-metric-name: {name!r} is both a category and a composite")
            if not math.isfinite(comp.constant):
                errors.append(f"non-finite-constant: composite {name!r}")
            for cat, w in comp.weights.items():
                if cat not in self.categories:
                    errors.append(f"unknown-category: composite {name!r} weights {cat!r}")
                if not math.isfinite(w):
                    errors.append(f"non-finite-weight: composite {name!r} weight for {cat!r}")
        if errors:
            raise ArtifactValidationError("invalid dictionary config", errors)

    @property
    def metric_names(self) -> tuple[str, ...]:
        return tuple(self.categories) + tuple(self.composites)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DictionaryConfig":
        categories = {
            str(name): frozenset(str(s) for s in stems)
            for name, stems in data.get("categories", {}).items()
        }
        composites = {}
        for name, spec in data.get("composites", {}).items():
            composites[str(name)] = CompositeMetric(
                constant=float(spec.get("constant", 0.0)),
                weights={str(k): float(v) for k, v in spec.get("weights", {}).items()},
            )
        return cls(categories=categories, composites=composites)

    @classmethod
    def from_file(cls, path: Path) -> "DictionaryConfig":
        return cls.from_dict(read_json(Path(path)))


def default_dictionary() -> DictionaryConfig:
    """The small demo dictionary shipped with the package."""
    return DictionaryConfig.from_file(Path(__file__).parent / "data" / "default_dictionary.json")


def _category_score(tokens: list[str], stems: frozenset[str]) -> float:
    if not tokens:
        return 0.0
    matched = sum(1 for tok in tokens if any(tok == s or tok.startswith(s) for s in stems))
    return 100.0 * matched / len(tokens)


def _clamp(value: float) -> float:
    return min(100.0, max(0.0, value))


def compute_psycholinguistics(transcript: Transcript, config: DictionaryConfig) -> PsycholinguisticSeries:
    """One metric row per utterance; all values in [0, 100]."""
    rows = []
    for utt in transcript.utterances:
        tokens = tokenize(utt.text)
        cat_scores = {name: _category_score(tokens, stems) for name, stems in config.categories.items()}
        row = [cat_scores[name] for name in config.categories]
        for comp in config.composites.values():
            value = comp.constant + sum(w * cat_scores[cat] for cat, w in comp.weights.items())
            row.append(_clamp(value))
        rows.append(tuple(row))
    return PsycholinguisticSeries(
        discussion_id=transcript.discussion_id,
        metric_names=config.metric_names,
        values=tuple(rows),
    )
