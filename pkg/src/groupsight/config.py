"""Runtime configuration and clocks.

Config file shape (all keys optional; missing providers fall back to the
deterministic mocks):

    {
      "providers": {
        "generation": {"endpoint": "...", "model_tag": "..."},
        "embedding": {"endpoint": "...", "dimension": 1536}
      },
      "fusion": {"rrf_k": 60, "top_n": 10},
      "dictionaries": "path/to/dictionary.json",
      "deterministic": true
    }

Credentials come from the environment (``GROUPSIGHT_GENERATION_API_KEY``,
``GROUPSIGHT_EMBEDDING_API_KEY``) and override anything in the file.
``deterministic`` pins artifact timestamps to a fixed instant so repeated
runs produce byte-identical stores; it defaults to true exactly when the
generation provider is the mock.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .jsonio import read_json

DETERMINISTIC_INSTANT = datetime(2026, 1, 1, tzinfo=timezone.utc)

GENERATION_KEY_ENV = "GROUPSIGHT_GENERATION_API_KEY"
EMBEDDING_KEY_ENV = "GROUPSIGHT_EMBEDDING_API_KEY"


class Clock:
    def now(self) -> datetime:  # pragma: no cover - interface
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> datetime:
        return datetime.now(timezone.utc)


class FixedClock(Clock):
    def __init__(self, instant: datetime = DETERMINISTIC_INSTANT):
        self.instant = instant

    def now(self) -> datetime:
        return self.instant


@dataclass(frozen=True)
class GenerationSettings:
    endpoint: str | None = None
    model_tag: str = ""
    api_key: str | None = None


@dataclass(frozen=True)
class EmbeddingSettings:
    endpoint: str | None = None
    dimension: int = 256
    api_key: str | None = None


@dataclass(frozen=True)
class AppConfig:
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    rrf_k: float = 60.0
    top_n: int = 10
    dictionaries: str | None = None
    deterministic: bool | None = None

    def is_deterministic(self) -> bool:
        if self.deterministic is not None:
            return self.deterministic
        return self.generation.endpoint is None

    def clock(self) -> Clock:
        return FixedClock() if self.is_deterministic() else SystemClock()


def load_config(path: Path | None = None, env: dict[str, str] | None = None) -> AppConfig:
    env = os.environ if env is None else env
    data: dict[str, Any] = {}
    if path is not None and Path(path).exists():
        data = read_json(Path(path))
    providers = data.get("providers", {})
    gen = providers.get("generation", {}) or {}
    emb = providers.get("embedding", {}) or {}
    fusion = data.get("fusion", {}) or {}
    return AppConfig(
        generation=GenerationSettings(
            endpoint=gen.get("endpoint"),
            model_tag=str(gen.get("model_tag", "")),
            api_key=env.get(GENERATION_KEY_ENV) or gen.get("api_key"),
        ),
        embedding=EmbeddingSettings(
            endpoint=emb.get("endpoint"),
            dimension=int(emb.get("dimension", 256)),
            api_key=env.get(EMBEDDING_KEY_ENV) or emb.get("api_key"),
        ),
        rrf_k=float(fusion.get("rrf_k", 60.0)),
        top_n=int(fusion.get("top_n", 10)),
        dictionaries=data.get("dictionaries"),
        deterministic=data.get("deterministic"),
    )
