/** Expandable agent-trace view with citation links. */

import { ArtifactKind, TracePayload } from "./types.js";

export interface TraceOptions {
  onCitationClick?(discussionId: string, kind: ArtifactKind): void;
}

export function renderTrace(container: HTMLElement, trace: TracePayload, options: TraceOptions = {}): void {
  container.replaceChildren();

  if (trace.stopped_reason === "iteration_cap") {
    const banner = document.createElement("div");
    banner.className = "banner evidence-limited";
    banner.textContent =
      "Evidence-limited response: the agent hit its iteration cap before finishing.";
    container.appendChild(banner);
  }

  const answer = document.createElement("p");
  answer.className = "synthesis";
  answer.textContent = trace.synthesis;
  container.appendChild(answer);

  if (trace.citations.length > 0) {
    const citations = document.createElement("div");
    citations.className = "citations";
    for (const citation of trace.citations) {
      const link = document.createElement("button");
      link.type = "button";
      link.className = "citation";
      link.dataset.discussionId = citation.discussion_id;
      link.dataset.kind = citation.kind;
      link.textContent = `${citation.discussion_id} / ${citation.kind}`;
      link.addEventListener("click", () =>
        options.onCitationClick?.(citation.discussion_id, citation.kind),
      );
      citations.appendChild(link);
    }
    container.appendChild(citations);
  }

  trace.iterations.forEach((iteration, i) => {
    const section = document.createElement("details");
    section.className = "trace-iteration";
    const summary = document.createElement("summary");
    const callCount = iteration.tool_calls.length;
    summary.textContent = `Iteration ${i + 1} — ${callCount} tool call${callCount === 1 ? "" : "s"}`;
    section.appendChild(summary);

    const reasoning = document.createElement("p");
    reasoning.className = "reasoning";
    reasoning.textContent = iteration.reasoning_text;
    section.appendChild(reasoning);

    iteration.tool_results.forEach((result, j) => {
      const call = iteration.tool_calls[j];
      const row = document.createElement("div");
      row.className = result.ok ? "tool-result ok" : "tool-result failed";
      const title = document.createElement("code");
      title.textContent = call
        ? `${call.tool}(${JSON.stringify(call.arguments)})`
        : result.tool;
      const outcome = document.createElement("pre");
      outcome.textContent = result.ok
        ? JSON.stringify(result.payload, null, 2)
        : `error: ${result.error_note ?? "unknown"}`;
      row.append(title, outcome);
      section.appendChild(row);
    });
    container.appendChild(section);
  });
}
