"""Retrieval evaluation harness: Recall@K / MRR@K over query cases and configs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .index import ArtifactIndex, FusionConfig
from .jsonio import canonical_json, read_json
from .model import ARTIFACT_KINDS

logger = logging.getLogger(__name__)

QUERY_CATEGORIES = ("direct", "analytical")


@dataclass(frozen=True)
class RetrievalEvalCase:
    query: str
    category: str
    relevant: frozenset[str]

    def __post_init__(self):
        if self.category not in QUERY_CATEGORIES:
            raise ValueError(f"unknown query category {self.category!r}")
        if not self.relevant:
            raise ValueError("relevant set must be non-empty")


def load_cases(path: Path) -> list[RetrievalEvalCase]:
    """Cases JSON: [{"query": ..., "category": "direct"|"analytical", "relevant": [...]}]."""
    data = read_json(Path(path))
    return [
        RetrievalEvalCase(
            query=str(entry["query"]),
            category=str(entry["category"]),
            relevant=frozenset(str(r) for r in entry["relevant"]),
        )
        for entry in data
    ]


def recall_at_k(ranked: Sequence[str], relevant: frozenset[str] | set[str], k: int) -> float:
    """Fraction of the relevant set appearing in the top k."""
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    top = set(ranked[:k])
    return len(top & set(relevant)) / len(relevant)


def mrr_at_k(ranked: Sequence[str], relevant: frozenset[str] | set[str], k: int) -> float:
    """Reciprocal rank of the first relevant item within the top k (0 if none)."""
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    for position, doc_id in enumerate(ranked[:k], start=1):
        if doc_id in relevant:
            return 1.0 / position
    return 0.0


def condition_label(cfg: FusionConfig) -> str:
    kinds = tuple(cfg.allowed_kinds)
    if kinds == ARTIFACT_KINDS:
        return "all_artifacts"
    return "+".join(kinds)


def standard_configs(rrf_k: float = 60.0, top_n: int = 10) -> list[FusionConfig]:
    """The four evaluation conditions: transcript-only, +concept maps, +assessments, all."""
    return [
        FusionConfig(rrf_k=rrf_k, top_n=top_n, allowed_kinds=("transcript",)),
        FusionConfig(rrf_k=rrf_k, top_n=top_n, allowed_kinds=("transcript", "concept_map")),
        FusionConfig(rrf_k=rrf_k, top_n=top_n, allowed_kinds=("transcript", "assessment")),
        FusionConfig(rrf_k=rrf_k, top_n=top_n, allowed_kinds=ARTIFACT_KINDS),
    ]


@dataclass
class EvalReport:
    """Per condition x category metric means; regenerating with the same seed is byte-identical."""

    seed: int
    rows: list[dict] = field(default_factory=list)
    skipped_cases: list[str] = field(default_factory=list)

    def row(self, condition: str, category: str) -> dict | None:
        for row in self.rows:
            if row["condition"] == condition and row["category"] == category:
                return row
        return None

    def to_json(self) -> str:
        return canonical_json(
            {"seed": self.seed, "rows": self.rows, "skipped_cases": self.skipped_cases}
        )

    def to_text_table(self) -> str:
        conditions: list[str] = []
        for row in self.rows:
            if row["condition"] not in conditions:
                conditions.append(row["condition"])
        header = (
            f"{'condition':<28} {'direct':^24} {'analytical':^24}\n"
            f"{'':<28} {'R@5':>7} {'R@10':>7} {'MRR@5':>7}  {'R@5':>7} {'R@10':>7} {'MRR@5':>7}"
        )
        lines = [header, "-" * len(header.splitlines()[1])]
        for condition in conditions:
            cells = []
            for category in QUERY_CATEGORIES:
                row = self.row(condition, category)
                if row is None or row["n_queries"] == 0:
                    cells.extend(["      -"] * 3)
                else:
                    cells.extend(
                        f"{row[m]:7.3f}" for m in ("recall_at_5", "recall_at_10", "mrr_at_5")
                    )
            lines.append(f"{condition:<28} {cells[0]} {cells[1]} {cells[2]}  {cells[3]} {cells[4]} {cells[5]}")
        if self.skipped_cases:
            lines.append("")
            lines.extend(f"skipped: {s}" for s in self.skipped_cases)
        return "\n".join(lines) + "\n"


def run_retrieval_eval(
    cases: Sequence[RetrievalEvalCase],
    configs: Sequence[FusionConfig],
    index: ArtifactIndex,
    seed: int = 0,
) -> EvalReport:
    """Evaluate every config over every case; cases naming unindexed discussions are skipped."""
    indexed_ids = {doc.discussion_id for kind in ARTIFACT_KINDS for doc in index.documents(kind)}
    usable: list[RetrievalEvalCase] = []
    report = EvalReport(seed=seed)
    for case in cases:
        unknown = case.relevant - indexed_ids
        if unknown:
            message = f"{case.query!r}: relevant discussion(s) not indexed: {sorted(unknown)}"
            logger.warning("skipping case %s", message)
            report.skipped_cases.append(message)
            continue
        usable.append(case)

    for cfg in configs:
        for category in QUERY_CATEGORIES:
            selected = [c for c in usable if c.category == category]
            recalls5, recalls10, mrrs5 = [], [], []
            for case in selected:
                hits = index.search_sessions(case.query, cfg)
                ranked = [h.discussion_id for h in hits]
                recalls5.append(recall_at_k(ranked, case.relevant, 5))
                recalls10.append(recall_at_k(ranked, case.relevant, 10))
                mrrs5.append(mrr_at_k(ranked, case.relevant, 5))
            n = len(selected)
            report.rows.append(
                {
                    "condition": condition_label(cfg),
                    "category": category,
                    "n_queries": n,
                    "recall_at_5": sum(recalls5) / n if n else 0.0,
                    "recall_at_10": sum(recalls10) / n if n else 0.0,
                    "mrr_at_5": sum(mrrs5) / n if n else 0.0,
                }
            )
    return report
