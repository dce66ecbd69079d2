/** View state: selection, artifact-kind toggles, chat request construction. */

import { ARTIFACT_KINDS, ArtifactKind, ChatRequest, ChatResponse } from "./types.js";

export interface KindToggles {
  transcript: boolean;
  concept_map: boolean;
  assessment: boolean;
}

export interface Viewport {
  zoom: number;
  panX: number;
  panY: number;
}

export interface ChatExchange {
  query: string;
  response: ChatResponse;
}

export interface ViewState {
  selectedSession: string | null;
  selectedDiscussion: string | null;
  activeTab: "transcript" | "concept_map" | "assessment" | "metrics";
  viewport: Viewport;
  selectedNode: string | null;
  chatHistory: ChatExchange[];
  toggles: KindToggles;
  /** Engaged by the baseline shortcut; cleared when a non-transcript toggle turns on. */
  baselineShortcut: boolean;
}

export function createViewState(): ViewState {
  return {
    selectedSession: null,
    selectedDiscussion: null,
    activeTab: "transcript",
    viewport: { zoom: 1, panX: 0, panY: 0 },
    selectedNode: null,
    chatHistory: [],
    toggles: { transcript: true, concept_map: true, assessment: true },
    baselineShortcut: false,
  };
}

/** Allowed kinds in canonical order, mirroring the toggles exactly. */
export function allowedKinds(toggles: KindToggles): ArtifactKind[] {
  return ARTIFACT_KINDS.filter((kind) => toggles[kind]);
}

/** Inverse of allowedKinds; together they are a bijection over the 7 legal states. */
export function togglesFromKinds(kinds: readonly ArtifactKind[]): KindToggles {
  return {
    transcript: kinds.includes("transcript"),
    concept_map: kinds.includes("concept_map"),
    assessment: kinds.includes("assessment"),
  };
}

/**
 * Flip one artifact-kind toggle. Refuses to turn the last enabled kind off
 * (the UI invariant: toggles are never all off). Returns whether the change
 * was applied.
 */
export function setToggle(state: ViewState, kind: ArtifactKind, on: boolean): boolean {
  if (!on && allowedKinds(state.toggles).length === 1 && state.toggles[kind]) {
    return false;
  }
  state.toggles = { ...state.toggles, [kind]: on };
  if (on && kind !== "transcript") {
    state.baselineShortcut = false;
  }
  return true;
}

/** Baseline shortcut: restrict the agent to the transcript collection only. */
export function applyBaselineShortcut(state: ViewState): void {
  state.toggles = { transcript: true, concept_map: false, assessment: false };
  state.baselineShortcut = true;
}

/** Build the chat request for the current toggles; empty queries are blocked client-side. */
export function buildChatRequest(state: ViewState, query: string): ChatRequest {
  const trimmed = query.trim();
  if (!trimmed) {
    throw new Error("query must not be empty");
  }
  const kinds = allowedKinds(state.toggles);
  return {
    query: trimmed,
    allowed_kinds: kinds,
    baseline_mode: state.baselineShortcut && kinds.length === 1 && kinds[0] === "transcript",
  };
}
