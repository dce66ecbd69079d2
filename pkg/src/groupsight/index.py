"""Per-kind artifact collections, cosine search, and reciprocal rank fusion.

Each (discussion, kind) pair owns exactly one indexed document; indexing
the same pair again replaces it.  Collections persist as one snapshot file
each (versioned header line + one JSON record per document) and are fully
rebuildable from the artifact store.  Corpus scale is tens of documents,
so search is an exact cosine scan — no ANN structures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import StoreError
from .jsonio import atomic_write_text, canonical_json_line
from .model import ARTIFACT_KINDS, format_timestamp, parse_timestamp
from .embedding import EmbeddingProvider, EmbeddingVector

SNAPSHOT_VERSION = 1

DEFAULT_RRF_K = 60.0
DEFAULT_TOP_N = 10


@dataclass(frozen=True)
class FusionConfig:
    rrf_k: float = DEFAULT_RRF_K
    top_n: int = DEFAULT_TOP_N
    allowed_kinds: tuple[str, ...] = ARTIFACT_KINDS

    def __post_init__(self):
        if self.rrf_k <= 0:
            raise ValueError("rrf_k must be positive")
        if self.top_n < 1:
            raise ValueError("top_n must be at least 1")
        kinds = tuple(self.allowed_kinds)
        if not kinds:
            raise ValueError("allowed_kinds must be non-empty")
        unknown = set(kinds) - set(ARTIFACT_KINDS)
        if unknown:
            raise ValueError(f"unknown artifact kinds: {sorted(unknown)}")
        # Normalize to the canonical kind order, dropping duplicates.
        object.__setattr__(
            self, "allowed_kinds", tuple(k for k in ARTIFACT_KINDS if k in kinds)
        )


@dataclass(frozen=True)
class IndexedDocument:
    doc_id: str
    kind: str
    discussion_id: str
    text: str
    vector: EmbeddingVector
    indexed_at: datetime


@dataclass(frozen=True)
class SearchHit:
    discussion_id: str
    kind: str
    similarity: float
    rank: int


class FusedHit(NamedTuple):
    discussion_id: str
    score: float
    kinds: tuple[str, ...]


def rrf_score(ranks: Iterable[int], rrf_k: float) -> float:
    """Sum 1/(k + rank) over ranks, accumulated in sorted order for exactness."""
    return sum(1.0 / (rrf_k + r) for r in sorted(ranks))


def rrf_fuse(lists: Sequence[Sequence[str]], cfg: FusionConfig) -> list[tuple[str, float]]:
    """Fuse duplicate-free ranked id lists; ties broken by ascending id."""
    ranks_by_id: dict[str, list[int]] = {}
    for ranked in lists:
        seen: set[str] = set()
        for position, doc_id in enumerate(ranked, start=1):
            if doc_id in seen:
                raise ValueError(f"ranked list contains duplicate id {doc_id!r}")
            seen.add(doc_id)
            ranks_by_id.setdefault(doc_id, []).append(position)
    scored = [(doc_id, rrf_score(ranks, cfg.rrf_k)) for doc_id, ranks in ranks_by_id.items()]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[: cfg.top_n]


class ArtifactIndex:
    """Three in-memory collections (one per artifact kind) with snapshot persistence.

    Reads may run concurrently; writers must follow the single-writer
    contract per collection (the workspace serializes mutations).
    """

    def __init__(self, embedder: EmbeddingProvider):
        self.embedder = embedder
        self._collections: dict[str, dict[str, IndexedDocument]] = {
            kind: {} for kind in ARTIFACT_KINDS
        }

    # -- mutation ----------------------------------------------------------

    def index_artifact(self, discussion_id: str, kind: str, text: str, indexed_at: datetime) -> IndexedDocument:
        """Embed ``text`` and upsert the single document for (discussion, kind)."""
        self._check_kind(kind)
        if not text.strip():
            raise ValueError("artifact text must be non-empty")
        doc = IndexedDocument(
            doc_id=f"{discussion_id}/{kind}",
            kind=kind,
            discussion_id=discussion_id,
            text=text,
            vector=self.embedder.embed(text),
            indexed_at=indexed_at,
        )
        self._collections[kind][discussion_id] = doc
        return doc

    def remove(self, discussion_id: str, kind: str) -> bool:
        self._check_kind(kind)
        return self._collections[kind].pop(discussion_id, None) is not None

    def restore(self, doc: IndexedDocument) -> None:
        """Reinsert a previously indexed document without re-embedding (rollback path)."""
        self._check_kind(doc.kind)
        self._collections[doc.kind][doc.discussion_id] = doc

    # -- queries -----------------------------------------------------------

    def documents(self, kind: str) -> list[IndexedDocument]:
        self._check_kind(kind)
        return [self._collections[kind][d] for d in sorted(self._collections[kind])]

    def count(self, kind: str) -> int:
        self._check_kind(kind)
        return len(self._collections[kind])

    def get(self, discussion_id: str, kind: str) -> IndexedDocument | None:
        self._check_kind(kind)
        return self._collections[kind].get(discussion_id)

    def search_collection(self, query: str, kind: str, k: int) -> list[SearchHit]:
        """Top-k by cosine similarity; ties broken by ascending discussion id."""
        self._check_kind(kind)
        if not self._collections[kind]:
            return []
        return self._rank_vector(self.embedder.embed(query), kind, k)

    def search_sessions(self, query: str, cfg: FusionConfig) -> list[FusedHit]:
        """Search every allowed collection and fuse the rankings with RRF."""
        non_empty = [k for k in cfg.allowed_kinds if self._collections[k]]
        if not non_empty:
            return []
        query_vector = self.embedder.embed(query)
        per_kind: dict[str, list[SearchHit]] = {
            kind: self._rank_vector(query_vector, kind, cfg.top_n) for kind in non_empty
        }
        fused = rrf_fuse([[h.discussion_id for h in per_kind[k]] for k in non_empty], cfg)
        results = []
        for discussion_id, score in fused:
            kinds = tuple(
                k for k in non_empty if any(h.discussion_id == discussion_id for h in per_kind[k])
            )
            results.append(FusedHit(discussion_id=discussion_id, score=score, kinds=kinds))
        return results

    def _rank_vector(self, query: EmbeddingVector, kind: str, k: int) -> list[SearchHit]:
        docs = self.documents(kind)
        if not docs:
            return []
        # Per-document np.dot (not one matmul): every similarity is then a
        # reproducible function of exactly one vector pair, so independently
        # computed reference values agree bit-for-bit and tie-breaks are stable.
        sims = [
            0.0
            if query.norm == 0.0 or d.vector.norm == 0.0
            else float(np.dot(d.vector.values, query.values)) / (d.vector.norm * query.norm)
            for d in docs
        ]
        order = sorted(range(len(docs)), key=lambda i: (-sims[i], docs[i].discussion_id))
        return [
            SearchHit(
                discussion_id=docs[i].discussion_id,
                kind=kind,
                similarity=float(sims[i]),
                rank=rank,
            )
            for rank, i in enumerate(order[:k], start=1)
        ]

    # -- persistence ---------------------------------------------------------

    def save(self, index_dir: Path) -> None:
        """Write one snapshot file per collection (records sorted by discussion id)."""
        index_dir = Path(index_dir)
        for kind in ARTIFACT_KINDS:
            docs = self.documents(kind)
            header = {
                "version": SNAPSHOT_VERSION,
                "collection": kind,
                "dimension": self.embedder.dimension,
                "count": len(docs),
            }
            lines = [canonical_json_line(header)]
            lines.extend(
                canonical_json_line(
                    {
                        "doc_id": d.doc_id,
                        "discussion_id": d.discussion_id,
                        "text": d.text,
                        "vector": d.vector.to_list(),
                        "indexed_at": format_timestamp(d.indexed_at),
                    }
                )
                for d in docs
            )
            atomic_write_text(index_dir / f"{kind}.snap", "\n".join(lines) + "\n")

    @classmethod
    def load(cls, index_dir: Path, embedder: EmbeddingProvider) -> "ArtifactIndex":
        import json

        index = cls(embedder)
        index_dir = Path(index_dir)
        for kind in ARTIFACT_KINDS:
            path = index_dir / f"{kind}.snap"
            if not path.exists():
                continue
            with open(path, encoding="utf-8") as fh:
                lines = [line for line in fh.read().splitlines() if line]
            if not lines:
                continue
            header = json.loads(lines[0])
            if header.get("version") != SNAPSHOT_VERSION or header.get("collection") != kind:
                raise StoreError(f"bad snapshot header in {path}")
            if header.get("count") != len(lines) - 1:
                raise StoreError(f"snapshot record count mismatch in {path}")
            for line in lines[1:]:
                record = json.loads(line)
                doc = IndexedDocument(
                    doc_id=record["doc_id"],
                    kind=kind,
                    discussion_id=record["discussion_id"],
                    text=record["text"],
                    vector=EmbeddingVector(record["vector"]),
                    indexed_at=parse_timestamp(record["indexed_at"]),
                )
                index._collections[kind][doc.discussion_id] = doc
        return index

    def _check_kind(self, kind: str) -> None:
        if kind not in ARTIFACT_KINDS:
            raise ValueError(f"unknown artifact kind {kind!r}")
