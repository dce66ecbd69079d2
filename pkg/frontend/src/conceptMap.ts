/** Interactive concept-map view: force-directed SVG graph with zoom/pan.
 *
 * The layout is seeded from the map content, so the same map renders the
 * same way on every load.
 */

import { ConceptMapPayload, ConceptNodePayload } from "./types.js";
import { Viewport } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const NODE_COLORS: Record<string, string> = {
  idea: "#4e79a7",
  question: "#f28e2b",
  hypothesis: "#59a14f",
  example: "#76b7b2",
  problem: "#e15759",
  solution: "#8cd17d",
  goal: "#b07aa1",
  uncertainty: "#bab0ac",
  conclusion: "#edc948",
  action: "#ff9da7",
};

export interface Point {
  x: number;
  y: number;
}

export interface ConceptMapHandle {
  nodeElements: Map<string, SVGGElement>;
  edgeElements: Map<string, SVGGElement>;
  positions: Map<string, Point>;
  setViewport(viewport: Viewport): void;
  selectNode(nodeId: string | null): void;
}

export interface ConceptMapOptions {
  width?: number;
  height?: number;
  /** Fired with the node's linked utterance indices when a node is clicked. */
  onNodeClick?(node: ConceptNodePayload): void;
  onViewportChange?(viewport: Viewport): void;
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Deterministic force-directed layout seeded from the map content. */
export function layoutConceptMap(
  map: ConceptMapPayload,
  width: number,
  height: number,
  iterations = 120,
): Map<string, Point> {
  const seed = fnv1a(
    map.discussion_id +
      "|" +
      map.nodes.map((n) => n.node_id + ":" + n.label).join(",") +
      "|" +
      map.edges.map((e) => e.edge_id + ":" + e.source + ">" + e.target).join(","),
  );
  const rand = mulberry32(seed);
  const positions = new Map<string, Point>();
  for (const node of map.nodes) {
    positions.set(node.node_id, {
      x: width * (0.15 + 0.7 * rand()),
      y: height * (0.15 + 0.7 * rand()),
    });
  }
  const ids = map.nodes.map((n) => n.node_id);
  const springLength = Math.min(width, height) / Math.max(2, Math.sqrt(ids.length));
  for (let step = 0; step < iterations; step++) {
    const cooling = 1 - step / iterations;
    const forces = new Map<string, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = positions.get(ids[i])!;
        const b = positions.get(ids[j])!;
        const dx = a.x - b.x;
        const dy = a.y - b.y;
        const dist = Math.max(8, Math.hypot(dx, dy));
        const repulsion = (springLength * springLength) / dist / dist;
        forces.get(ids[i])!.x += dx * repulsion;
        forces.get(ids[i])!.y += dy * repulsion;
        forces.get(ids[j])!.x -= dx * repulsion;
        forces.get(ids[j])!.y -= dy * repulsion;
      }
    }
    for (const edge of map.edges) {
      const a = positions.get(edge.source);
      const b = positions.get(edge.target);
      if (!a || !b) continue;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const dist = Math.max(8, Math.hypot(dx, dy));
      const pull = ((dist - springLength) / dist) * 0.05;
      forces.get(edge.source)!.x += dx * pull;
      forces.get(edge.source)!.y += dy * pull;
      forces.get(edge.target)!.x -= dx * pull;
      forces.get(edge.target)!.y -= dy * pull;
    }
    for (const id of ids) {
      const p = positions.get(id)!;
      const f = forces.get(id)!;
      p.x += f.x * 4 * cooling + (width / 2 - p.x) * 0.01;
      p.y += f.y * 4 * cooling + (height / 2 - p.y) * 0.01;
      p.x = Math.min(width - 20, Math.max(20, p.x));
      p.y = Math.min(height - 20, Math.max(20, p.y));
    }
  }
  return positions;
}

function payloadProblems(map: ConceptMapPayload): string | null {
  if (!map || !Array.isArray(map.nodes) || !Array.isArray(map.edges)) {
    return "malformed concept map payload";
  }
  const ids = new Set<string>();
  for (const node of map.nodes) {
    if (!node.node_id || typeof node.label !== "string") return "malformed node entry";
    if (ids.has(node.node_id)) return `duplicate node id ${node.node_id}`;
    ids.add(node.node_id);
  }
  for (const edge of map.edges) {
    if (!ids.has(edge.source) || !ids.has(edge.target)) {
      return `edge ${edge.edge_id} references a missing node`;
    }
  }
  return null;
}

export function renderConceptMap(
  container: HTMLElement,
  map: ConceptMapPayload,
  options: ConceptMapOptions = {},
): ConceptMapHandle | null {
  container.replaceChildren();
  const problem = payloadProblems(map);
  if (problem) {
    const panel = document.createElement("div");
    panel.className = "error-panel";
    panel.textContent = `Cannot render concept map: ${problem}`;
    container.appendChild(panel);
    return null;
  }
  if (map.nodes.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.textContent = "This concept map has no concepts yet.";
    container.appendChild(empty);
    return null;
  }

  const width = options.width ?? 900;
  const height = options.height ?? 600;
  const positions = layoutConceptMap(map, width, height);
  const nodesById = new Map(map.nodes.map((n) => [n.node_id, n]));

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "concept-map");
  const world = document.createElementNS(SVG_NS, "g");
  world.setAttribute("class", "world");
  svg.appendChild(world);

  const edgeElements = new Map<string, SVGGElement>();
  for (const edge of map.edges) {
    const a = positions.get(edge.source)!;
    const b = positions.get(edge.target)!;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "edge");
    group.dataset.edgeId = edge.edge_id;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("stroke", "#9aa4ad");
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String((a.x + b.x) / 2));
    label.setAttribute("y", String((a.y + b.y) / 2 - 4));
    label.setAttribute("class", "edge-label");
    label.textContent = edge.edge_type;
    group.append(line, label);
    world.appendChild(group);
    edgeElements.set(edge.edge_id, group);
  }

  const nodeElements = new Map<string, SVGGElement>();
  for (const node of map.nodes) {
    const p = positions.get(node.node_id)!;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "node");
    group.dataset.nodeId = node.node_id;
    group.dataset.nodeType = node.node_type;
    group.setAttribute("transform", `translate(${p.x}, ${p.y})`);
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("r", "14");
    circle.setAttribute("fill", NODE_COLORS[node.node_type] ?? "#777777");
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("y", "28");
    label.setAttribute("class", "node-label");
    label.textContent = node.label;
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `[${node.node_type}] ${node.label}\n${node.description}`;
    group.append(title, circle, label);
    group.addEventListener("click", () => {
      handle.selectNode(node.node_id);
      options.onNodeClick?.(nodesById.get(node.node_id)!);
    });
    world.appendChild(group);
    nodeElements.set(node.node_id, group);
  }

  container.appendChild(svg);

  let viewport: Viewport = { zoom: 1, panX: 0, panY: 0 };
  const applyViewport = () => {
    world.setAttribute(
      "transform",
      `translate(${viewport.panX}, ${viewport.panY}) scale(${viewport.zoom})`,
    );
  };
  applyViewport();

  svg.addEventListener("wheel", (event) => {
    event.preventDefault();
    const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
    viewport = { ...viewport, zoom: Math.min(8, Math.max(0.2, viewport.zoom * factor)) };
    applyViewport();
    options.onViewportChange?.(viewport);
  });
  let dragging: { x: number; y: number } | null = null;
  svg.addEventListener("mousedown", (event) => {
    dragging = { x: event.clientX - viewport.panX, y: event.clientY - viewport.panY };
  });
  svg.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    viewport = { ...viewport, panX: event.clientX - dragging.x, panY: event.clientY - dragging.y };
    applyViewport();
    options.onViewportChange?.(viewport);
  });
  svg.addEventListener("mouseup", () => {
    dragging = null;
  });

  const handle: ConceptMapHandle = {
    nodeElements,
    edgeElements,
    positions,
    setViewport(next: Viewport) {
      viewport = { ...next };
      applyViewport();
    },
    selectNode(nodeId: string | null) {
      for (const [id, element] of nodeElements) {
        element.classList.toggle("selected", id === nodeId);
      }
    },
  };
  return handle;
}
