/** Per-metric line charts of the psycholinguistic series over utterance index. */

import { SeriesPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const LINE_COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948"];

export function renderMetricTimeline(
  container: HTMLElement,
  series: SeriesPayload,
  width = 640,
  height = 120,
): void {
  container.replaceChildren();
  if (series.values.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.textContent = "No utterances to chart.";
    container.appendChild(empty);
    return;
  }
  const n = series.values.length;
  series.metric_names.forEach((metric, column) => {
    const figure = document.createElement("figure");
    figure.className = "metric-chart";
    figure.dataset.metric = metric;
    const caption = document.createElement("figcaption");
    caption.textContent = metric;

    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    const line = document.createElementNS(SVG_NS, "polyline");
    const points = series.values
      .map((row, i) => {
        const x = n === 1 ? width / 2 : (i / (n - 1)) * (width - 10) + 5;
        const y = height - 5 - (row[column] / 100) * (height - 10);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ");
    line.setAttribute("points", points);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", LINE_COLORS[column % LINE_COLORS.length]);
    line.setAttribute("stroke-width", "2");
    svg.appendChild(line);
    figure.append(caption, svg);
    container.appendChild(figure);
  });
}
