"""Bounded evidence-gathering agent over the six store/index tools.

The loop runs at most ``max_iterations`` provider steps; each step either
requests tool calls or signals finish.  A separate synthesis call then
produces the final answer with citations.  Tool errors are recorded as
results and shown to the provider on the next iteration — only provider
transport failures abort the run.  Mixed-initiative kind restrictions are
enforced at dispatch time, so a provider that requests a disallowed tool
gets a rejection result rather than data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

from .errors import AgentFailedError, StoreError
from .index import ARTIFACT_KINDS, FusionConfig
from .jsonio import canonical_json_line
from .providers import GenerationProvider, GenerationRequest, call_with_retries, schema_errors
from .textutil import tokenize

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 8
DEFAULT_TOOL_RESULT_CHAR_BUDGET = 8000

TOOL_SCHEMAS: dict[str, dict[str, Any]] = {
    "search_sessions": {
        "description": "Semantic search across the allowed artifact collections; returns the most relevant discussions.",
        "params": {"query": "string"},
        "required": ["query"],
    },
    "list_sessions": {
        "description": "List available sessions with their discussions and metadata.",
        "params": {},
        "required": [],
    },
    "get_transcript": {
        "description": "Fetch a discussion transcript with per-utterance psycholinguistic metrics.",
        "params": {"discussion_id": "string"},
        "required": ["discussion_id"],
    },
    "get_concept_map": {
        "description": "Fetch a discussion's concept map.",
        "params": {"discussion_id": "string"},
        "required": ["discussion_id"],
    },
    "get_assessment": {
        "description": "Fetch a discussion's collaboration assessment (scores, analyses, evidence).",
        "params": {"discussion_id": "string"},
        "required": ["discussion_id"],
    },
    "get_speaker_profile": {
        "description": "Profile a participant across sessions: participation share, concept contributions, psycholinguistic means.",
        "params": {"speaker_id": "string"},
        "required": ["speaker_id"],
    },
}

# Artifact kind a tool touches directly (None = metadata only).
TOOL_KIND_REQUIREMENTS: dict[str, str | None] = {
    "search_sessions": None,
    "list_sessions": None,
    "get_transcript": "transcript",
    "get_concept_map": "concept_map",
    "get_assessment": "assessment",
    "get_speaker_profile": None,
}

AGENT_SYSTEM_TEXT = (
    "You are an analytics assistant gathering evidence about recorded group "
    "discussions. You operate in a loop: inspect the evidence collected so far, "
    "decide what is still missing, and either request more tool calls or finish.\n"
    "Respond with a single JSON object, either\n"
    '{"action": "tools", "reasoning": str, "tool_calls": [{"tool": str, "arguments": object}]}\n'
    "or\n"
    '{"action": "finish", "reasoning": str}\n'
    "Only the tools listed in the request are available."
)

SYNTHESIS_SYSTEM_TEXT = (
    "Write the final answer to the user's query using only the evidence provided. "
    "Be specific and cite the discussions the evidence came from.\n"
    "Respond with a single JSON object:\n"
    '{"answer": str, "citations": [{"discussion_id": str, "kind": str}]}\n'
    "Every citation must name evidence that actually appears in the request."
)


@dataclass(frozen=True)
class AgentConfig:
    max_iterations: int = MAX_ITERATIONS
    allowed_kinds: tuple[str, ...] = ARTIFACT_KINDS
    baseline_mode: bool = False
    fusion: FusionConfig = field(default_factory=FusionConfig)
    tool_result_char_budget: int = DEFAULT_TOOL_RESULT_CHAR_BUDGET

    def __post_init__(self):
        if not 1 <= self.max_iterations <= MAX_ITERATIONS:
            raise ValueError(f"max_iterations must be in 1..{MAX_ITERATIONS}")
        kinds = tuple(k for k in ARTIFACT_KINDS if k in set(self.allowed_kinds))
        if not kinds:
            raise ValueError("allowed_kinds must be a non-empty subset of the artifact kinds")
        if self.baseline_mode and kinds != ("transcript",):
            raise ValueError("baseline_mode requires allowed_kinds == ('transcript',)")
        object.__setattr__(self, "allowed_kinds", kinds)
        # Search obeys the same kind restriction as the fetch tools.
        object.__setattr__(
            self,
            "fusion",
            FusionConfig(
                rrf_k=self.fusion.rrf_k,
                top_n=self.fusion.top_n,
                allowed_kinds=kinds,
            ),
        )


@dataclass(frozen=True)
class ToolCall:
    tool: str
    arguments: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ToolResult:
    tool: str
    ok: bool
    payload: Any = None
    error_note: str | None = None


@dataclass(frozen=True)
class AgentIteration:
    reasoning_text: str
    tool_calls: tuple[ToolCall, ...]
    tool_results: tuple[ToolResult, ...]


@dataclass(frozen=True)
class AgentTrace:
    query: str
    iterations: tuple[AgentIteration, ...]
    synthesis: str
    citations: tuple[tuple[str, str], ...]
    stopped_reason: str  # "finished" | "iteration_cap"
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: str
    sessions: tuple[str, ...]
    participation_share: dict[str, float]
    concept_contributions: int | None
    psycholinguistic_means: dict[str, float]


def trace_to_dict(trace: AgentTrace) -> dict[str, Any]:
    return {
        "query": trace.query,
        "iterations": [
            {
                "reasoning_text": it.reasoning_text,
                "tool_calls": [{"tool": c.tool, "arguments": c.arguments} for c in it.tool_calls],
                "tool_results": [
                    {"tool": r.tool, "ok": r.ok, "payload": r.payload, "error_note": r.error_note}
                    for r in it.tool_results
                ],
            }
            for it in trace.iterations
        ],
        "synthesis": trace.synthesis,
        "citations": [{"discussion_id": d, "kind": k} for d, k in trace.citations],
        "stopped_reason": trace.stopped_reason,
        "notes": list(trace.notes),
    }


def speaker_profile_to_dict(profile: SpeakerProfile) -> dict[str, Any]:
    out: dict[str, Any] = {
        "speaker_id": profile.speaker_id,
        "sessions": list(profile.sessions),
        "participation_share": dict(sorted(profile.participation_share.items())),
        "psycholinguistic_means": dict(sorted(profile.psycholinguistic_means.items())),
    }
    if profile.concept_contributions is not None:
        out["concept_contributions"] = profile.concept_contributions
    return out


# ---------------------------------------------------------------------------
# Tool dispatch
# ---------------------------------------------------------------------------


def available_tools(cfg: AgentConfig) -> list[str]:
    """Tool names listed in the prompt: fetch tools for excluded kinds are hidden."""
    names = []
    for name in TOOL_SCHEMAS:
        required = TOOL_KIND_REQUIREMENTS[name]
        if required is not None and required not in cfg.allowed_kinds:
            continue
        names.append(name)
    return names


def _argument_errors(call: ToolCall) -> list[str]:
    schema = TOOL_SCHEMAS[call.tool]
    errors = []
    for param in schema["required"]:
        if param not in call.arguments:
            errors.append(f"missing required argument {param!r}")
    for param, value in call.arguments.items():
        if param not in schema["params"]:
            errors.append(f"unexpected argument {param!r}")
        elif not isinstance(value, str):
            errors.append(f"argument {param!r} must be a string")
    return errors


def dispatch_tool(call: ToolCall, cfg: AgentConfig, host: "ToolHost") -> ToolResult:
    """Route one tool call; failures come back as results, never exceptions."""
    if call.tool not in TOOL_SCHEMAS:
        return ToolResult(tool=call.tool, ok=False, error_note=f"unknown-tool: {call.tool!r}")
    arg_errors = _argument_errors(call)
    if arg_errors:
        return ToolResult(tool=call.tool, ok=False, error_note="bad-arguments: " + "; ".join(arg_errors))
    required_kind = TOOL_KIND_REQUIREMENTS[call.tool]
    if required_kind is not None and required_kind not in cfg.allowed_kinds:
        return ToolResult(tool=call.tool, ok=False, error_note="artifact kind excluded by configuration")
    try:
        payload = host.run(call, cfg)
    except StoreError as exc:
        return ToolResult(tool=call.tool, ok=False, error_note=str(exc))
    except Exception as exc:  # defensive: tool bugs must not kill the run
        logger.exception("tool %s raised", call.tool)
        return ToolResult(tool=call.tool, ok=False, error_note=f"tool-error: {exc}")
    return ToolResult(tool=call.tool, ok=True, payload=payload)


class ToolHost:
    """Read-only implementations of the six tools over a workspace."""

    def __init__(self, workspace):
        self.workspace = workspace

    def run(self, call: ToolCall, cfg: AgentConfig) -> Any:
        if call.tool == "list_sessions":
            return self.list_sessions()
        if call.tool == "search_sessions":
            return self.search_sessions(call.arguments["query"], cfg)
        if call.tool == "get_transcript":
            return self.get_transcript(call.arguments["discussion_id"])
        if call.tool == "get_concept_map":
            return self.get_concept_map(call.arguments["discussion_id"])
        if call.tool == "get_assessment":
            return self.get_assessment(call.arguments["discussion_id"])
        if call.tool == "get_speaker_profile":
            return self.get_speaker_profile(call.arguments["speaker_id"], cfg)
        raise StoreError(f"unroutable tool {call.tool!r}")

    def list_sessions(self) -> dict[str, Any]:
        from .model import format_timestamp

        sessions = []
        for session, discussions in self.workspace.store.list_sessions():
            sessions.append(
                {
                    "session_id": session.session_id,
                    "title": session.title,
                    "started_at": format_timestamp(session.started_at),
                    "metadata": dict(session.metadata),
                    "discussions": [
                        {
                            "discussion_id": d.discussion_id,
                            "group_label": d.group_label,
                            "duration_ms": d.duration_ms,
                        }
                        for d in discussions
                    ],
                }
            )
        return {"sessions": sessions}

    def search_sessions(self, query: str, cfg: AgentConfig) -> dict[str, Any]:
        hits = self.workspace.index.search_sessions(query, cfg.fusion)
        return {
            "hits": [
                {"discussion_id": h.discussion_id, "score": h.score, "kinds": list(h.kinds)}
                for h in hits
            ]
        }

    def get_transcript(self, discussion_id: str) -> dict[str, Any]:
        from .model import series_to_dict, transcript_to_dict, utterance_to_dict

        transcript = self.workspace.store.read_transcript(discussion_id)
        series = self.workspace.store.read_metrics(discussion_id)
        payload = transcript_to_dict(transcript)
        if series is None:
            payload["metric_names"] = []
            for utt in payload["utterances"]:
                utt["metrics"] = {}
            payload["notice"] = "psycholinguistic metrics not yet computed for this discussion"
        else:
            payload["metric_names"] = list(series.metric_names)
            for utt, row in zip(payload["utterances"], series.values):
                utt["metrics"] = dict(zip(series.metric_names, row))
        return payload

    def get_concept_map(self, discussion_id: str) -> dict[str, Any]:
        from .model import concept_map_to_dict

        cmap = self.workspace.store.read_concept_map(discussion_id)
        if cmap is None:
            raise StoreError(f"artifact missing: no concept map for {discussion_id!r}")
        return concept_map_to_dict(cmap)

    def get_assessment(self, discussion_id: str) -> dict[str, Any]:
        from .model import assessment_to_dict

        assessment = self.workspace.store.read_assessment(discussion_id)
        if assessment is None:
            raise StoreError(f"artifact missing: no assessment for {discussion_id!r}")
        return assessment_to_dict(assessment)

    def get_speaker_profile(self, speaker_id: str, cfg: AgentConfig) -> dict[str, Any]:
        include_concepts = "concept_map" in cfg.allowed_kinds
        profile = compute_speaker_profile(speaker_id, self.workspace, include_concepts=include_concepts)
        return speaker_profile_to_dict(profile)


def compute_speaker_profile(speaker_id: str, workspace, include_concepts: bool = True) -> SpeakerProfile:
    """Aggregate one participant's footprint across every stored discussion.

    Participation share uses the psycholinguistics tokenizer (speaker token
    count over discussion token count).  Concept contributions are omitted
    when concept maps are excluded by configuration, so that a restricted
    agent never observes concept-map-derived data.
    """
    sessions: list[str] = []
    shares: dict[str, float] = {}
    concept_count = 0
    metric_sums: dict[str, float] = {}
    metric_rows = 0

    for session, discussions in workspace.store.list_sessions():
        for discussion in discussions:
            try:
                transcript = workspace.store.read_transcript(discussion.discussion_id)
            except StoreError:
                continue
            speaker_tokens = 0
            total_tokens = 0
            speaker_indices = []
            for utt in transcript.utterances:
                n = len(tokenize(utt.text))
                total_tokens += n
                if utt.speaker_id == speaker_id:
                    speaker_tokens += n
                    speaker_indices.append(utt.index)
            if not speaker_indices:
                continue
            if session.session_id not in sessions:
                sessions.append(session.session_id)
            shares[discussion.discussion_id] = (
                speaker_tokens / total_tokens if total_tokens else 0.0
            )
            series = workspace.store.read_metrics(discussion.discussion_id)
            if series is not None:
                for idx in speaker_indices:
                    row = series.values[idx]
                    for name, value in zip(series.metric_names, row):
                        metric_sums[name] = metric_sums.get(name, 0.0) + value
                    metric_rows += 1
            if include_concepts:
                cmap = workspace.store.read_concept_map(discussion.discussion_id)
                if cmap is not None:
                    concept_count += sum(1 for n in cmap.nodes if speaker_id in n.speaker_ids)

    if not shares:
        raise StoreError(f"unknown speaker {speaker_id!r}: appears in no stored transcript")
    means = (
        {name: total / metric_rows for name, total in metric_sums.items()} if metric_rows else {}
    )
    return SpeakerProfile(
        speaker_id=speaker_id,
        sessions=tuple(sorted(sessions)),
        participation_share=shares,
        concept_contributions=concept_count if include_concepts else None,
        psycholinguistic_means=means,
    )


# ---------------------------------------------------------------------------
# The loop
# ---------------------------------------------------------------------------


def _truncate_payload(value: Any, budget: int) -> str:
    rendered = canonical_json_line(value)
    if len(rendered) <= budget:
        return rendered
    return rendered[:budget] + "...[truncated]"


def _build_step_request(query: str, cfg: AgentConfig, iterations: list[AgentIteration]) -> GenerationRequest:
    tools = [
        {"tool": name, **TOOL_SCHEMAS[name]}
        for name in available_tools(cfg)
    ]
    history = []
    for it in iterations:
        history.append(
            {
                "reasoning": it.reasoning_text,
                "results": [
                    {
                        "tool": r.tool,
                        "ok": r.ok,
                        "detail": _truncate_payload(r.payload, cfg.tool_result_char_budget)
                        if r.ok
                        else (r.error_note or ""),
                    }
                    for r in it.tool_results
                ],
            }
        )
    return GenerationRequest(
        prompt_kind="agent_step",
        system_text=AGENT_SYSTEM_TEXT,
        user_text=canonical_json_line({"query": query, "tools": tools, "iterations": history}),
        schema_id="agent_step_v1",
    )


def _evidence_pairs(iterations: list[AgentIteration]) -> list[tuple[str, str]]:
    """(discussion_id, kind) pairs that successful tool results actually touched."""
    pairs: set[tuple[str, str]] = set()
    for it in iterations:
        for result in it.tool_results:
            if not result.ok or not isinstance(result.payload, dict):
                continue
            payload = result.payload
            if result.tool == "get_transcript":
                pairs.add((payload["discussion_id"], "transcript"))
            elif result.tool == "get_concept_map":
                pairs.add((payload["discussion_id"], "concept_map"))
            elif result.tool == "get_assessment":
                pairs.add((payload["discussion_id"], "assessment"))
            elif result.tool == "search_sessions":
                for hit in payload.get("hits", []):
                    for kind in hit.get("kinds", []):
                        pairs.add((hit["discussion_id"], kind))
            elif result.tool == "get_speaker_profile":
                for discussion_id in payload.get("participation_share", {}):
                    pairs.add((discussion_id, "transcript"))
    return sorted(pairs)


def _build_synthesis_request(
    query: str, cfg: AgentConfig, iterations: list[AgentIteration], evidence_limited: bool
) -> GenerationRequest:
    evidence = []
    for it in iterations:
        for result in it.tool_results:
            if result.ok:
                evidence.append(
                    {
                        "tool": result.tool,
                        "detail": _truncate_payload(result.payload, cfg.tool_result_char_budget),
                    }
                )
    body = {
        "query": query,
        "evidence": evidence,
        "evidence_pairs": [list(p) for p in _evidence_pairs(iterations)],
        "evidence_limited": evidence_limited,
    }
    return GenerationRequest(
        prompt_kind="synthesis",
        system_text=SYNTHESIS_SYSTEM_TEXT,
        user_text=canonical_json_line(body),
        schema_id="synthesis_v1",
    )


def run_agent(
    query: str,
    cfg: AgentConfig,
    provider: GenerationProvider,
    host: ToolHost,
    retries: int = 2,
    backoff_s: float = 0.0,
) -> AgentTrace:
    """Run the evidence loop plus one synthesis call and return the full trace.

    Always halts within ``cfg.max_iterations`` step calls plus one synthesis
    call.  Provider failures raise :class:`AgentFailedError` carrying the
    partial trace; tool failures are recorded in the trace and the loop
    continues.
    """
    if not query.strip():
        raise ValueError("query must be non-empty")

    iterations: list[AgentIteration] = []
    notes: list[str] = []
    stopped_reason = "iteration_cap"

    def _partial(reason: str) -> AgentTrace:
        return AgentTrace(
            query=query,
            iterations=tuple(iterations),
            synthesis="",
            citations=(),
            stopped_reason=reason,
            notes=tuple(notes),
        )

    for _ in range(cfg.max_iterations):
        request = _build_step_request(query, cfg, iterations)
        try:
            response = call_with_retries(provider, request, retries=retries, backoff_s=backoff_s)
            payload = response.payload()
        except Exception as exc:
            raise AgentFailedError(f"agent step failed: {exc}", partial_trace=_partial("iteration_cap")) from exc
        errors = schema_errors("agent_step_v1", payload)
        if errors:
            raise AgentFailedError(
                "provider returned a malformed agent step: " + "; ".join(errors),
                partial_trace=_partial("iteration_cap"),
            )
        reasoning = str(payload.get("reasoning", ""))
        if payload["action"] == "finish":
            iterations.append(AgentIteration(reasoning_text=reasoning, tool_calls=(), tool_results=()))
            stopped_reason = "finished"
            break
        calls = tuple(
            ToolCall(tool=str(c["tool"]), arguments=dict(c.get("arguments", {})))
            for c in payload["tool_calls"]
        )
        results = tuple(dispatch_tool(call, cfg, host) for call in calls)
        iterations.append(AgentIteration(reasoning_text=reasoning, tool_calls=calls, tool_results=results))

    evidence_limited = stopped_reason == "iteration_cap"
    if evidence_limited:
        notes.append("evidence-limited: iteration cap reached before the agent signalled finish")

    synthesis_request = _build_synthesis_request(query, cfg, iterations, evidence_limited)
    try:
        response = call_with_retries(provider, synthesis_request, retries=retries, backoff_s=backoff_s)
        payload = response.payload()
    except Exception as exc:
        raise AgentFailedError(f"synthesis failed: {exc}", partial_trace=_partial(stopped_reason)) from exc
    errors = schema_errors("synthesis_v1", payload)
    if errors:
        raise AgentFailedError(
            "provider returned a malformed synthesis: " + "; ".join(errors),
            partial_trace=_partial(stopped_reason),
        )

    answer = payload["answer"]
    resolvable = set(_evidence_pairs(iterations))
    citations: list[tuple[str, str]] = []
    dropped = 0
    for c in payload.get("citations", []):
        pair = (str(c["discussion_id"]), str(c["kind"]))
        if pair in resolvable:
            if pair not in citations:
                citations.append(pair)
        else:
            dropped += 1
    if dropped:
        notes.append(f"dropped {dropped} citation(s) that did not match any tool result in the trace")
    if not citations:
        notes.append("no-citations: synthesis provided no resolvable citations")

    return AgentTrace(
        query=query,
        iterations=tuple(iterations),
        synthesis=answer,
        citations=tuple(citations),
        stopped_reason=stopped_reason,
        notes=tuple(notes),
    )
