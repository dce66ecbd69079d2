"""Embedding providers and the vector type used by the per-kind indexes.

Artifacts are embedded whole (no chunking); texts whose estimated token
count exceeds the provider window are rejected up front.  The mock
provider uses signed feature hashing of tokens into fixed-size buckets,
which makes vectors a deterministic bag-of-words function of the text.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .errors import EmbedFailedError, TextTooLongError
from .jsonio import canonical_json_line
from .textutil import stable_hash64, tokenize


class EmbeddingVector:
    """Fixed-length real vector with its L2 norm cached."""

    __slots__ = ("values", "norm")

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("embedding vector must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding vector has non-finite entries")
        self.values = arr
        self.norm = float(np.linalg.norm(arr))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, EmbeddingVector) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={len(self)}, norm={self.norm:.4f})"

    def to_list(self) -> list[float]:
        return [float(v) for v in self.values]


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; 0.0 when either vector is all-zero."""
    if a.norm == 0.0 or b.norm == 0.0:
        return 0.0
    return float(np.dot(a.values, b.values) / (a.norm * b.norm))


def estimate_tokens(text: str) -> int:
    """Cheap length heuristic (4 chars per token) for the window guard."""
    return math.ceil(len(text) / 4)


class EmbeddingProvider:
    """Interface: text in, vector out; exposes dimension and window size."""

    dimension: int
    window_tokens: int = 8192

    def embed(self, text: str) -> EmbeddingVector:
        stripped = text.strip()
        if not stripped:
            raise EmbedFailedError("cannot embed empty text")
        if estimate_tokens(text) > self.window_tokens:
            raise TextTooLongError(
                f"text (~{estimate_tokens(text)} tokens) exceeds the "
                f"{self.window_tokens}-token embedding window"
            )
        return self._embed(text)

    def _embed(self, text: str) -> EmbeddingVector:  # pragma: no cover
        raise NotImplementedError


class MockEmbeddingProvider(EmbeddingProvider):
    """Deterministic signed feature hashing into ``dimension`` buckets.

    Each token lands in bucket ``hash64(token) mod dimension`` with sign
    taken from hash bit 63; the accumulated vector is L2-normalized
    (all-zero stays all-zero).
    """

    def __init__(self, dimension: int = 256, window_tokens: int = 8192):
        self.dimension = dimension
        self.window_tokens = window_tokens

    def _embed(self, text: str) -> EmbeddingVector:
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in tokenize(text):
            h = stable_hash64(token)
            bucket = h % self.dimension
            sign = -1.0 if (h >> 63) & 1 else 1.0
            vec[bucket] += sign
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return EmbeddingVector(vec)


class HttpEmbeddingProvider(EmbeddingProvider):
    """POSTs text to an embedding endpoint returning {"vector": [...]}."""

    def __init__(
        self,
        endpoint: str,
        dimension: int,
        api_key: str | None = None,
        window_tokens: int = 8192,
        timeout_s: float = 30.0,
        transport=None,
    ):
        import httpx

        self.endpoint = endpoint
        self.dimension = dimension
        self.window_tokens = window_tokens
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(headers=headers, timeout=timeout_s, transport=transport)

    def _embed(self, text: str) -> EmbeddingVector:
        import httpx

        try:
            resp = self._client.post(self.endpoint, content=canonical_json_line({"text": text}))
            resp.raise_for_status()
            data: Any = resp.json()
        except httpx.HTTPError as exc:
            raise EmbedFailedError(f"embedding endpoint failure: {exc}") from exc
        vector = data.get("vector")
        if not isinstance(vector, list) or len(vector) != self.dimension:
            raise EmbedFailedError(
                f"embedding endpoint returned a malformed vector (expected dim {self.dimension})"
            )
        return EmbeddingVector(vector)
