/** Transcript pane: utterance list with scroll-to-anchor navigation. */

import { TranscriptPayload } from "./types.js";

export const HIGHLIGHT_WINDOW = 2;

export interface TranscriptHandle {
  /** Scroll to an utterance and highlight it plus the surrounding window. */
  scrollToUtterance(index: number): void;
  utteranceElement(index: number): HTMLElement | null;
}

function formatTime(ms: number): string {
  const totalSeconds = Math.floor(ms / 1000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

export function renderTranscript(container: HTMLElement, transcript: TranscriptPayload): TranscriptHandle {
  container.replaceChildren();
  const list = document.createElement("ol");
  list.className = "transcript";
  const elements = new Map<number, HTMLElement>();

  for (const utterance of transcript.utterances) {
    const item = document.createElement("li");
    item.className = "utterance";
    item.id = `utt-${utterance.index}`;
    item.dataset.index = String(utterance.index);

    const meta = document.createElement("span");
    meta.className = "utterance-meta";
    meta.textContent = `${formatTime(utterance.start_ms)} ${utterance.speaker_id}`;

    const text = document.createElement("span");
    text.className = "utterance-text";
    text.textContent = utterance.text;

    item.append(meta, text);
    list.appendChild(item);
    elements.set(utterance.index, item);
  }
  container.appendChild(list);

  return {
    scrollToUtterance(index: number) {
      for (const element of elements.values()) {
        element.classList.remove("highlight", "highlight-context");
      }
      const target = elements.get(index);
      if (!target) return;
      target.classList.add("highlight");
      for (let offset = -HIGHLIGHT_WINDOW; offset <= HIGHLIGHT_WINDOW; offset++) {
        if (offset === 0) continue;
        elements.get(index + offset)?.classList.add("highlight-context");
      }
      target.scrollIntoView({ block: "center", behavior: "smooth" });
    },
    utteranceElement(index: number) {
      return elements.get(index) ?? null;
    },
  };
}
