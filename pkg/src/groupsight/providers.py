"""Generation-provider contract: request/response types, HTTP transport, mock.

A provider turns a :class:`GenerationRequest` into a
:class:`GenerationResponse`.  The HTTP provider posts canonical JSON to a
configured endpoint; the mock provider is fully deterministic and is what
every test and offline run uses.  Providers must be safe for concurrent
calls; the mock's script queues make a given instance single-run, so create
one instance per agent run.
"""

from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import GenerationFailedError, MockScriptError, ProviderTransportError
from .jsonio import canonical_json_line
from .textutil import stable_hash64

PROMPT_KINDS = ("concept_map", "assessment", "judge_pair", "agent_step", "synthesis")

SCHEMA_IDS = (
    "concept_map_v1",
    "assessment_v1",
    "judge_pair_v1",
    "agent_step_v1",
    "synthesis_v1",
)


@dataclass(frozen=True)
class GenerationRequest:
    prompt_kind: str
    system_text: str
    user_text: str
    schema_id: str
    max_output_tokens: int = 4096

    def __post_init__(self):
        if self.prompt_kind not in PROMPT_KINDS:
            raise ValueError(f"unknown prompt kind {self.prompt_kind!r}")
        if self.schema_id not in SCHEMA_IDS:
            raise ValueError(f"unregistered schema id {self.schema_id!r}")
        if not self.user_text:
            raise ValueError("user_text must be non-empty")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt_kind": self.prompt_kind,
            "system_text": self.system_text,
            "user_text": self.user_text,
            "schema_id": self.schema_id,
            "max_output_tokens": self.max_output_tokens,
        }


@dataclass(frozen=True)
class GenerationResponse:
    raw_text: str
    parsed: Any = None
    provider_tag: str = ""
    latency_ms: int = 0

    def payload(self) -> Any:
        """Parsed value, falling back to JSON-decoding the raw text."""
        if self.parsed is not None:
            return self.parsed
        return json.loads(self.raw_text)


class GenerationProvider:
    """Interface: subclasses implement :meth:`generate`."""

    def generate(self, request: GenerationRequest) -> GenerationResponse:  # pragma: no cover
        raise NotImplementedError


def call_with_retries(
    provider: GenerationProvider,
    request: GenerationRequest,
    retries: int = 2,
    backoff_s: float = 0.5,
) -> GenerationResponse:
    """Retry transport failures with exponential backoff; other errors pass through."""
    attempt = 0
    while True:
        try:
            return provider.generate(request)
        except ProviderTransportError as exc:
            if attempt >= retries:
                raise GenerationFailedError(
                    f"provider failed after {retries} retries: {exc}"
                ) from exc
            if backoff_s > 0:
                time.sleep(backoff_s * (2**attempt))
            attempt += 1


class HttpGenerationProvider(GenerationProvider):
    """POSTs the canonical request JSON to an endpoint returning response JSON."""

    def __init__(self, endpoint: str, model_tag: str = "", api_key: str | None = None, timeout_s: float = 60.0, transport=None):
        import httpx

        self.endpoint = endpoint
        self.model_tag = model_tag
        self.timeout_s = timeout_s
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(headers=headers, timeout=timeout_s, transport=transport)

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        import httpx

        body = dict(request.to_dict())
        if self.model_tag:
            body["model_tag"] = self.model_tag
        try:
            resp = self._client.post(self.endpoint, content=canonical_json_line(body))
            resp.raise_for_status()
            data = resp.json()
        except httpx.HTTPError as exc:
            raise ProviderTransportError(f"generation endpoint failure: {exc}") from exc
        return GenerationResponse(
            raw_text=str(data.get("raw_text", "")),
            parsed=data.get("parsed"),
            provider_tag=str(data.get("provider_tag", self.model_tag or "http")),
            latency_ms=int(data.get("latency_ms", 0)),
        )


# ---------------------------------------------------------------------------
# Deterministic mock
# ---------------------------------------------------------------------------

# Transcript rendering shared by prompt builders and the mock parser:
# one utterance per line, "index<TAB>speaker<TAB>text".
def render_transcript_lines(utterances) -> str:
    return "\n".join(f"{u.index}\t{u.speaker_id}\t{u.text}" for u in utterances)


def _parse_transcript_lines(text: str) -> list[tuple[int, str, str]]:
    rows = []
    for line in text.splitlines():
        parts = line.split("\t", 2)
        if len(parts) == 3:
            rows.append((int(parts[0]), parts[1], parts[2]))
    return rows


_SENTENCE_SPLIT = re.compile(r"[.?!]+")


def _split_sentences(text: str) -> list[str]:
    out = []
    for chunk in _SENTENCE_SPLIT.split(text):
        chunk = chunk.strip()
        if chunk:
            out.append(chunk)
    return out


@dataclass
class MockGenerationProvider(GenerationProvider):
    """Rule-based deterministic provider for offline runs and tests.

    Behavior by prompt kind:

    * ``concept_map``: one "idea" node per sentence (split on ``.?!``),
      label = first 8 words, consecutive nodes chained with "relates to".
    * ``assessment``: score(dim) = 40 + (hash(user_text + dim) mod 51);
      templated analysis; key evidence = the first utterance's text.
    * ``judge_pair``: order-invariant scores — (5, 5) for identical
      analyses, otherwise hash-derived values in 1..5.
    * ``agent_step`` / ``synthesis``: consumed from the supplied scripts;
      an unscripted agent_step raises :class:`MockScriptError`.  Synthesis
      falls back to a deterministic summary of the evidence pairs embedded
      in the request when no script is supplied.

    Script entries may be payload dicts or callables(request) -> payload.
    ``concept_map_script`` / ``assessment_script`` / ``judge_script``
    override the rule-based behavior when non-empty (used to exercise
    validation and repair paths).  ``fail_next`` injects that many
    transport failures before the next successful call.
    """

    agent_script: list = field(default_factory=list)
    synthesis_script: list = field(default_factory=list)
    concept_map_script: list = field(default_factory=list)
    assessment_script: list = field(default_factory=list)
    judge_script: list = field(default_factory=list)
    fail_next: int = 0
    provider_tag: str = "mock"

    def __post_init__(self):
        self._lock = threading.Lock()

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        with self._lock:
            if self.fail_next > 0:
                self.fail_next -= 1
                raise ProviderTransportError("injected transport failure")
            payload = self._dispatch(request)
        return GenerationResponse(
            raw_text=canonical_json_line(payload),
            parsed=payload,
            provider_tag=self.provider_tag,
            latency_ms=0,
        )

    def _dispatch(self, request: GenerationRequest) -> Any:
        kind = request.prompt_kind
        if kind == "concept_map":
            if self.concept_map_script:
                return _run_script_entry(self.concept_map_script.pop(0), request)
            return self._concept_map(request)
        if kind == "assessment":
            if self.assessment_script:
                return _run_script_entry(self.assessment_script.pop(0), request)
            return self._assessment(request)
        if kind == "judge_pair":
            if self.judge_script:
                return _run_script_entry(self.judge_script.pop(0), request)
            return self._judge(request)
        if kind == "agent_step":
            if not self.agent_script:
                raise MockScriptError("no scripted agent_step response available")
            return _run_script_entry(self.agent_script.pop(0), request)
        if kind == "synthesis":
            if self.synthesis_script:
                return _run_script_entry(self.synthesis_script.pop(0), request)
            return self._default_synthesis(request)
        raise MockScriptError(f"unsupported prompt kind {kind!r}")

    def _concept_map(self, request: GenerationRequest) -> dict[str, Any]:
        rows = _parse_transcript_lines(request.user_text)
        nodes = []
        for index, speaker, text in rows:
            for sentence in _split_sentences(text):
                label = " ".join(sentence.split()[:8])
                nodes.append(
                    {
                        "node_id": f"n{len(nodes) + 1}",
                        "label": label,
                        "node_type": "idea",
                        "description": sentence,
                        "source_utterance_indices": [index],
                        "speaker_ids": [speaker],
                    }
                )
        edges = [
            {
                "edge_id": f"e{i}",
                "source": f"n{i}",
                "target": f"n{i + 1}",
                "edge_type": "relates to",
                "rationale": "consecutive sentences in the discussion",
            }
            for i in range(1, len(nodes))
        ]
        return {"nodes": nodes, "edges": edges}

    def _assessment(self, request: GenerationRequest) -> dict[str, Any]:
        from .model import DIMENSIONS

        rows = _parse_transcript_lines(request.user_text)
        first_text = rows[0][2] if rows else ""
        dims = []
        for name in DIMENSIONS:
            score = 40 + stable_hash64(request.user_text + name) % 51
            dims.append(
                {
                    "dimension": name,
                    "score": score,
                    "analysis": f"Scripted {name} reading derived deterministically from the transcript.",
                    "key_evidence": [first_text] if first_text else [],
                }
            )
        return {"dimensions": dims}

    def _judge(self, request: GenerationRequest) -> dict[str, Any]:
        data = json.loads(request.user_text)
        a = data.get("analyst_1", {})
        b = data.get("analyst_2", {})
        text_a = json.dumps(a, sort_keys=True)
        text_b = json.dumps(b, sort_keys=True)
        if text_a == text_b:
            return {"behavioral_alignment": 5, "evidence_correspondence": 5}
        h = stable_hash64("\x00".join(sorted((text_a, text_b))))
        return {
            "behavioral_alignment": 1 + h % 5,
            "evidence_correspondence": 1 + (h >> 8) % 5,
        }

    def _default_synthesis(self, request: GenerationRequest) -> dict[str, Any]:
        data = json.loads(request.user_text)
        pairs = data.get("evidence_pairs", [])
        ids = sorted({p[0] for p in pairs})
        if ids:
            answer = "Evidence gathered from discussions: " + ", ".join(ids) + "."
        else:
            answer = "No supporting evidence was retrieved for this query."
        if data.get("evidence_limited"):
            answer += " (Response generated under the iteration cap; evidence may be incomplete.)"
        return {
            "answer": answer,
            "citations": [{"discussion_id": d, "kind": k} for d, k in pairs],
        }


def _run_script_entry(entry: Any, request: GenerationRequest) -> Any:
    if callable(entry):
        return entry(request)
    return entry


# ---------------------------------------------------------------------------
# Response schema checks (consumers validate parsed payloads against these)
# ---------------------------------------------------------------------------


def schema_errors(schema_id: str, value: Any) -> list[str]:
    """Structural conformance errors for a parsed payload; [] when it conforms."""
    checker: Callable[[Any], list[str]] | None = _SCHEMA_CHECKS.get(schema_id)
    if checker is None:
        return [f"unregistered-schema: {schema_id!r}"]
    if not isinstance(value, dict):
        return [f"{schema_id}: payload must be an object"]
    return checker(value)


def _check_concept_map(value: dict) -> list[str]:
    errors = []
    for key in ("nodes", "edges"):
        if not isinstance(value.get(key), list):
            errors.append(f"concept_map_v1: {key!r} must be a list")
    return errors


def _check_assessment(value: dict) -> list[str]:
    if not isinstance(value.get("dimensions"), list):
        return ["assessment_v1: 'dimensions' must be a list"]
    return []


def _check_judge(value: dict) -> list[str]:
    errors = []
    for key in ("behavioral_alignment", "evidence_correspondence"):
        v = value.get(key)
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            errors.append(f"judge_pair_v1: {key!r} must be numeric")
    return errors


def _check_agent_step(value: dict) -> list[str]:
    action = value.get("action")
    if action == "finish":
        return []
    if action == "tools":
        calls = value.get("tool_calls")
        if not isinstance(calls, list) or not calls:
            return ["agent_step_v1: 'tools' action requires a non-empty 'tool_calls' list"]
        errors = []
        for call in calls:
            if not isinstance(call, dict) or "tool" not in call:
                errors.append("agent_step_v1: each tool call needs a 'tool' field")
            elif "arguments" in call and not isinstance(call["arguments"], dict):
                errors.append("agent_step_v1: 'arguments' must be an object")
        return errors
    return [f"agent_step_v1: unknown action {action!r}"]


def _check_synthesis(value: dict) -> list[str]:
    errors = []
    if not isinstance(value.get("answer"), str):
        errors.append("synthesis_v1: 'answer' must be a string")
    citations = value.get("citations", [])
    if not isinstance(citations, list):
        errors.append("synthesis_v1: 'citations' must be a list")
    else:
        for c in citations:
            if not isinstance(c, dict) or "discussion_id" not in c or "kind" not in c:
                errors.append("synthesis_v1: each citation needs discussion_id and kind")
    return errors


_SCHEMA_CHECKS = {
    "concept_map_v1": _check_concept_map,
    "assessment_v1": _check_assessment,
    "judge_pair_v1": _check_judge,
    "agent_step_v1": _check_agent_step,
    "synthesis_v1": _check_synthesis,
}
