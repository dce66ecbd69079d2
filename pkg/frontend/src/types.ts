/** Payload shapes mirroring the API's canonical JSON. */

export type ArtifactKind = "transcript" | "concept_map" | "assessment";

export const ARTIFACT_KINDS: readonly ArtifactKind[] = ["transcript", "concept_map", "assessment"];

export const DIMENSIONS: readonly string[] = [
  "climate",
  "communication",
  "compatibility",
  "conflict",
  "context",
  "contribution",
  "constructive",
];

export interface UtterancePayload {
  index: number;
  speaker_id: string;
  start_ms: number;
  end_ms: number;
  text: string;
  /** Present on agent transcript payloads; absent from the plain endpoint. */
  metrics?: Record<string, number>;
}

export interface TranscriptPayload {
  discussion_id: string;
  utterances: UtterancePayload[];
}

export interface ConceptNodePayload {
  node_id: string;
  label: string;
  node_type: string;
  description: string;
  source_utterance_indices: number[];
  speaker_ids: string[];
}

export interface ConceptEdgePayload {
  edge_id: string;
  source: string;
  target: string;
  edge_type: string;
  rationale: string;
}

export interface ConceptMapPayload {
  discussion_id: string;
  nodes: ConceptNodePayload[];
  edges: ConceptEdgePayload[];
  generated_at: string;
  provider_tag: string;
}

export interface EvidenceAnchorPayload {
  excerpt: string;
  utterance_index: number | null;
  match_score: number;
}

export interface DimensionAssessmentPayload {
  dimension: string;
  score: number;
  analysis: string;
  key_evidence: string[];
  evidence_anchors?: EvidenceAnchorPayload[];
}

export interface AssessmentPayload {
  discussion_id: string;
  dimensions: DimensionAssessmentPayload[];
  generated_at: string;
  provider_tag: string;
}

export interface SeriesPayload {
  discussion_id: string;
  metric_names: string[];
  values: number[][];
}

export interface SearchHitPayload {
  discussion_id: string;
  score: number;
  kinds: ArtifactKind[];
}

export interface ToolCallPayload {
  tool: string;
  arguments: Record<string, unknown>;
}

export interface ToolResultPayload {
  tool: string;
  ok: boolean;
  payload: unknown;
  error_note: string | null;
}

export interface TraceIterationPayload {
  reasoning_text: string;
  tool_calls: ToolCallPayload[];
  tool_results: ToolResultPayload[];
}

export interface CitationPayload {
  discussion_id: string;
  kind: ArtifactKind;
}

export interface TracePayload {
  query: string;
  iterations: TraceIterationPayload[];
  synthesis: string;
  citations: CitationPayload[];
  stopped_reason: "finished" | "iteration_cap";
  notes: string[];
}

export interface ChatRequest {
  query: string;
  allowed_kinds: ArtifactKind[];
  baseline_mode: boolean;
}

export interface ChatResponse {
  answer: string;
  citations: CitationPayload[];
  trace: TracePayload;
}

export interface DiscussionSummary {
  discussion_id: string;
  group_label: string;
  duration_ms: number;
}

export interface SessionSummary {
  session_id: string;
  title: string;
  started_at: string;
  metadata: Record<string, string>;
  discussions: DiscussionSummary[];
}
