/** Dashboard bootstrap: session browser, artifact tabs, chat with the agent. */

import { ApiClient, ApiError } from "./api.js";
import { renderAssessment } from "./assessment.js";
import { renderConceptMap } from "./conceptMap.js";
import {
  ViewState,
  allowedKinds,
  applyBaselineShortcut,
  buildChatRequest,
  createViewState,
  setToggle,
} from "./state.js";
import { renderMetricTimeline } from "./timeline.js";
import { TranscriptHandle, renderTranscript } from "./transcript.js";
import { renderTrace } from "./trace.js";
import { ARTIFACT_KINDS, ArtifactKind } from "./types.js";

type Tab = "transcript" | "concept_map" | "assessment" | "metrics";

const TABS: { id: Tab; label: string }[] = [
  { id: "transcript", label: "Transcript" },
  { id: "concept_map", label: "Concept map" },
  { id: "assessment", label: "Assessment" },
  { id: "metrics", label: "Metrics" },
];

export class Dashboard {
  private readonly state: ViewState = createViewState();
  private transcriptHandle: TranscriptHandle | null = null;
  private chatBusy = false;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    this.root.replaceChildren();
    this.root.append(
      this.buildElement("nav", "sidebar"),
      this.buildMainPane(),
      this.buildChatPane(),
    );
    await this.refreshSessions();
  }

  private buildElement(tag: string, className: string): HTMLElement {
    const element = document.createElement(tag);
    element.className = className;
    return element;
  }

  private buildMainPane(): HTMLElement {
    const pane = this.buildElement("main", "artifact-pane");
    const tabs = this.buildElement("div", "tabs");
    for (const tab of TABS) {
      const button = document.createElement("button");
      button.type = "button";
      button.dataset.tab = tab.id;
      button.textContent = tab.label;
      button.addEventListener("click", () => this.showTab(tab.id));
      tabs.appendChild(button);
    }
    const content = this.buildElement("div", "tab-content");
    content.id = "tab-content";
    pane.append(tabs, content);
    return pane;
  }

  private buildChatPane(): HTMLElement {
    const pane = this.buildElement("aside", "chat-pane");
    const toggles = this.buildElement("div", "kind-toggles");
    for (const kind of ARTIFACT_KINDS) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = this.state.toggles[kind];
      box.dataset.kind = kind;
      box.addEventListener("change", () => {
        if (!setToggle(this.state, kind, box.checked)) {
          box.checked = true; // refused: at least one kind stays on
        }
        this.syncToggleBoxes();
      });
      label.append(box, document.createTextNode(` ${kind.replace("_", " ")}`));
      toggles.appendChild(label);
    }
    const baseline = document.createElement("button");
    baseline.type = "button";
    baseline.textContent = "transcript-only baseline";
    baseline.addEventListener("click", () => {
      applyBaselineShortcut(this.state);
      this.syncToggleBoxes();
    });
    toggles.appendChild(baseline);

    const history = this.buildElement("div", "chat-history");
    history.id = "chat-history";

    const form = document.createElement("form");
    form.className = "chat-form";
    const input = document.createElement("input");
    input.type = "text";
    input.placeholder = "Ask about the discussions...";
    const send = document.createElement("button");
    send.type = "submit";
    send.textContent = "Ask";
    form.append(input, send);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.sendChat(input.value).then((ok) => {
        if (ok) input.value = "";
      });
    });

    pane.append(toggles, history, form);
    return pane;
  }

  private syncToggleBoxes(): void {
    for (const box of this.root.querySelectorAll<HTMLInputElement>(".kind-toggles input")) {
      const kind = box.dataset.kind as ArtifactKind;
      box.checked = this.state.toggles[kind];
    }
  }

  private async refreshSessions(): Promise<void> {
    const sidebar = this.root.querySelector(".sidebar")!;
    sidebar.replaceChildren();
    const { sessions } = await this.api.listSessions();
    for (const session of sessions) {
      const block = document.createElement("div");
      block.className = "session";
      const title = document.createElement("h2");
      title.textContent = session.title || session.session_id;
      block.appendChild(title);
      const list = document.createElement("ul");
      for (const discussion of session.discussions) {
        const item = document.createElement("li");
        const link = document.createElement("button");
        link.type = "button";
        link.textContent = discussion.group_label
          ? `${discussion.discussion_id} (${discussion.group_label})`
          : discussion.discussion_id;
        link.addEventListener("click", () => {
          this.state.selectedSession = session.session_id;
          this.state.selectedDiscussion = discussion.discussion_id;
          void this.showTab(this.state.activeTab);
        });
        item.appendChild(link);
        list.appendChild(item);
      }
      block.appendChild(list);
      sidebar.appendChild(block);
    }
  }

  async showTab(tab: Tab): Promise<void> {
    this.state.activeTab = tab;
    for (const button of this.root.querySelectorAll<HTMLButtonElement>(".tabs button")) {
      button.classList.toggle("active", button.dataset.tab === tab);
    }
    const content = this.root.querySelector<HTMLElement>("#tab-content")!;
    const discussion = this.state.selectedDiscussion;
    if (!discussion) {
      content.textContent = "Select a discussion to explore its artifacts.";
      return;
    }
    try {
      if (tab === "transcript") {
        const transcript = await this.api.getTranscript(discussion);
        this.transcriptHandle = renderTranscript(content, transcript);
      } else if (tab === "concept_map") {
        const map = await this.api.getConceptMap(discussion);
        renderConceptMap(content, map, {
          onNodeClick: (node) => {
            if (node.source_utterance_indices.length > 0) {
              void this.navigateToUtterance(node.source_utterance_indices[0]);
            }
          },
          onViewportChange: (viewport) => {
            this.state.viewport = viewport;
          },
        });
      } else if (tab === "assessment") {
        const assessment = await this.api.getAssessment(discussion);
        renderAssessment(content, assessment, {
          onEvidenceClick: (index) => void this.navigateToUtterance(index),
        });
      } else {
        const series = await this.api.getMetrics(discussion);
        renderMetricTimeline(content, series);
      }
    } catch (error) {
      const panel = this.buildElement("div", "error-panel");
      panel.textContent =
        error instanceof ApiError && error.status === 404
          ? "This artifact has not been generated yet."
          : `Failed to load artifact: ${error}`;
      content.replaceChildren(panel);
    }
  }

  /** Evidence and concept links land on the anchored utterance in the transcript tab. */
  private async navigateToUtterance(index: number): Promise<void> {
    await this.showTab("transcript");
    this.transcriptHandle?.scrollToUtterance(index);
  }

  private async sendChat(query: string): Promise<boolean> {
    if (this.chatBusy) return false; // one request in flight at a time
    let request;
    try {
      request = buildChatRequest(this.state, query);
    } catch {
      return false; // empty query blocked client-side
    }
    this.chatBusy = true;
    try {
      const response = await this.api.chat(request);
      this.state.chatHistory.push({ query: request.query, response });
      const history = this.root.querySelector<HTMLElement>("#chat-history")!;
      const exchange = this.buildElement("div", "exchange");
      const question = document.createElement("p");
      question.className = "user-query";
      question.textContent = `${request.query}  [${allowedKinds(this.state.toggles).join(", ")}]`;
      const traceBox = this.buildElement("div", "trace-box");
      renderTrace(traceBox, response.trace, {
        onCitationClick: (discussionId, kind) => {
          this.state.selectedDiscussion = discussionId;
          void this.showTab(kind === "transcript" ? "transcript" : kind);
        },
      });
      exchange.append(question, traceBox);
      history.appendChild(exchange);
      return true;
    } finally {
      this.chatBusy = false;
    }
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app container");
  const dashboard = new Dashboard(new ApiClient(""), root);
  void dashboard.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
