/** Assessment panel: seven dimension cards with evidence-to-transcript links. */

import { AssessmentPayload, DIMENSIONS, DimensionAssessmentPayload } from "./types.js";

export interface AssessmentOptions {
  /** Fired with the anchored utterance index when anchored evidence is clicked. */
  onEvidenceClick?(utteranceIndex: number): void;
}

export interface AssessmentHandle {
  cards: Map<string, HTMLElement>;
}

function displayName(dimension: string): string {
  return dimension.charAt(0).toUpperCase() + dimension.slice(1);
}

function renderEvidence(
  card: HTMLElement,
  dimension: DimensionAssessmentPayload,
  options: AssessmentOptions,
): void {
  const block = document.createElement("div");
  block.className = "evidence";
  if (dimension.key_evidence.length === 0) {
    const none = document.createElement("p");
    none.className = "no-evidence";
    none.textContent = "(no key evidence)";
    block.appendChild(none);
    card.appendChild(block);
    return;
  }
  const list = document.createElement("ul");
  dimension.key_evidence.forEach((excerpt, i) => {
    const item = document.createElement("li");
    const anchor = dimension.evidence_anchors?.[i];
    if (anchor && anchor.utterance_index !== null) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "evidence-link";
      button.dataset.utteranceIndex = String(anchor.utterance_index);
      button.textContent = excerpt;
      button.addEventListener("click", () => options.onEvidenceClick?.(anchor.utterance_index!));
      item.appendChild(button);
    } else {
      const span = document.createElement("span");
      span.textContent = excerpt;
      const badge = document.createElement("span");
      badge.className = "badge unanchored";
      badge.textContent = "unanchored";
      item.append(span, badge);
    }
    list.appendChild(item);
  });
  block.appendChild(list);
  card.appendChild(block);
}

export function renderAssessment(
  container: HTMLElement,
  assessment: AssessmentPayload,
  options: AssessmentOptions = {},
): AssessmentHandle {
  container.replaceChildren();
  const cards = new Map<string, HTMLElement>();
  const byName = new Map(assessment.dimensions.map((d) => [d.dimension, d]));

  for (const name of DIMENSIONS) {
    const dimension = byName.get(name);
    if (!dimension) continue;
    const card = document.createElement("section");
    card.className = "dimension-card";
    card.dataset.dimension = name;

    const header = document.createElement("h3");
    header.textContent = `${displayName(name)} — ${dimension.score}/100`;

    const bar = document.createElement("div");
    bar.className = "score-bar";
    const fill = document.createElement("div");
    fill.className = "score-fill";
    fill.style.width = `${dimension.score}%`;
    bar.appendChild(fill);

    const analysis = document.createElement("p");
    analysis.className = "analysis";
    analysis.textContent = dimension.analysis;

    card.append(header, bar, analysis);
    renderEvidence(card, dimension, options);
    container.appendChild(card);
    cards.set(name, card);
  }
  return { cards };
}
