"""Shared text primitives: tokenization, match normalization, stable hashing."""

from __future__ import annotations

import hashlib
import re

# Runs of letters/digits (unicode-aware); underscores count as separators.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


def normalize_for_match(text: str) -> str:
    """Normalize text for excerpt matching: lowercase, strip punctuation, collapse whitespace."""
    return " ".join(_TOKEN_RE.findall(text.lower()))


def stable_hash64(text: str) -> int:
    """Stable unsigned 64-bit hash of a string (process-independent, unlike ``hash``)."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def round_half_up(value: float) -> int:
    """Round to the nearest integer with halves going away from zero."""
    if value >= 0:
        return int(value + 0.5)
    return -int(-value + 0.5)


def truncate_text(text: str, limit: int) -> str:
    """Cap a string at ``limit`` characters, marking the cut with an ellipsis."""
    if len(text) <= limit:
        return text
    return text[: max(limit - 1, 0)] + "…"
