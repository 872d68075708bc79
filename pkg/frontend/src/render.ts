/** DOM/SVG rendering of the three panels from the view model. Pure read:
 * all state lives in the model, all changes arrive via the event feed. */

import { layout, DEFAULT_LAYOUT } from "./layout.js";
import { BOARD_COLUMNS } from "./transitions.js";
import type { ClosureReport, LeafKind } from "./types.js";
import type { ViewModel } from "./viewmodel.js";

/** Fixed legend: leaf kind -> (icon, color). Documented in frontend/README. */
export const LEAF_LEGEND: Record<LeafKind, { icon: string; color: string }> = {
  escalate_privileges: { icon: "↑", color: "#c0392b" },
  maintain_access: { icon: "⚓", color: "#8e44ad" },
  information_gathering: { icon: "🔍", color: "#2471a3" },
  actions_on_objective: { icon: "🎯", color: "#b7950b" },
  cover_tracks: { icon: "🧹", color: "#148f77" },
  move: { icon: "→", color: "#6e2c00" },
};

const SVG_NS = "http://www.w3.org/2000/svg";

function el(tag: string, attrs: Record<string, string> = {}, text?: string): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string> = {}, text?: string): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderGraph(vm: ViewModel, container: HTMLElement): void {
  container.replaceChildren();
  const positions = new Map(layout(vm).map((p) => [p.id, p]));
  const nodeW = 180;
  const nodeH = 100;
  let width = 0;
  let height = 0;
  for (const p of positions.values()) {
    width = Math.max(width, p.x + nodeW + 60);
    height = Math.max(height, p.y + nodeH + 60);
  }
  const svg = svgEl("svg", {
    viewBox: `0 0 ${Math.max(width, 400)} ${Math.max(height, 240)}`,
    class: "graph-svg",
  });

  const marker = svgEl("marker", {
    id: "arrow",
    viewBox: "0 0 10 10",
    refX: "9",
    refY: "5",
    markerWidth: "7",
    markerHeight: "7",
    orient: "auto-start-reverse",
  });
  marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: "#555" }));
  const defs = svgEl("defs");
  defs.appendChild(marker);
  svg.appendChild(defs);

  const anchor = (id: string) => {
    const p = positions.get(id);
    if (!p) return { x: 0, y: 0 };
    return { x: p.x, y: p.y };
  };

  for (const edgeId of Object.keys(vm.edges).sort()) {
    const edge = vm.edges[edgeId];
    const from = anchor(edge.source);
    const to = anchor(edge.dest);
    const x1 = from.x + (edge.source === "attacker" ? 70 : nodeW);
    const y1 = from.y + nodeH / 2;
    const x2 = to.x;
    const y2 = to.y + nodeH / 2;
    const mx = (x1 + x2) / 2;
    const path = svgEl("path", {
      d: `M ${x1} ${y1} C ${mx} ${y1}, ${mx} ${y2}, ${x2} ${y2}`,
      class: `edge edge-${edge.kind}`,
      "marker-end": "url(#arrow)",
    });
    path.appendChild(svgEl("title", {}, `${edge.kind} ${edge.at}: ${edge.vector}`));
    svg.appendChild(path);
    svg.appendChild(
      svgEl(
        "text",
        { x: String(mx), y: String((y1 + y2) / 2 - 6), class: "edge-label" },
        edge.at
      )
    );
  }

  const attackerPos = positions.get("attacker") ?? { x: 40, y: 40 };
  const attackerGroup = svgEl("g", {
    transform: `translate(${attackerPos.x}, ${attackerPos.y})`,
  });
  attackerGroup.appendChild(
    svgEl("rect", { width: "70", height: String(nodeH), rx: "34", class: "node-attacker" })
  );
  attackerGroup.appendChild(
    svgEl("text", { x: "35", y: String(nodeH / 2 + 4), class: "node-title" }, vm.attacker.label)
  );
  svg.appendChild(attackerGroup);

  for (const targetId of Object.keys(vm.targets).sort()) {
    const target = vm.targets[targetId];
    const p = positions.get(targetId)!;
    const group = svgEl("g", { transform: `translate(${p.x}, ${p.y})`, class: "flower" });
    group.appendChild(
      svgEl("rect", { width: String(nodeW), height: String(nodeH), rx: "10", class: "node-target" })
    );
    group.appendChild(svgEl("text", { x: "10", y: "20", class: "node-title" }, target.label));
    group.appendChild(
      svgEl("text", { x: "10", y: "36", class: "node-sub" }, `first seen ${target.first_seen}`)
    );
    const leaves = [...target.leaves].sort((a, b) => (a.id < b.id ? -1 : 1));
    leaves.slice(0, 12).forEach((leaf, index) => {
      const cx = 18 + (index % 6) * 26;
      const cy = 58 + Math.floor(index / 6) * 26;
      const legend = LEAF_LEGEND[leaf.kind];
      const dot = svgEl("circle", {
        cx: String(cx),
        cy: String(cy),
        r: "11",
        fill: legend.color,
        class: "leaf-dot",
      });
      dot.appendChild(
        svgEl(
          "title",
          {},
          `${leaf.kind} ${leaf.observed_from} .. ${leaf.observed_to}\n${leaf.description}`
        )
      );
      group.appendChild(dot);
      group.appendChild(
        svgEl(
          "text",
          { x: String(cx), y: String(cy + 4), class: "leaf-icon" },
          legend.icon
        )
      );
    });
    svg.appendChild(group);
  }
  container.appendChild(svg);
}

export function renderBoard(
  vm: ViewModel,
  container: HTMLElement,
  hooks: {
    onDragStart: (questionId: string) => void;
    onDrop: (questionId: string, column: string) => void;
  }
): void {
  container.replaceChildren();
  for (const column of BOARD_COLUMNS) {
    const col = el("div", { class: "board-column", "data-column": column });
    col.appendChild(el("h3", {}, column));
    col.addEventListener("dragover", (event) => event.preventDefault());
    col.addEventListener("drop", (event) => {
      event.preventDefault();
      const questionId = event.dataTransfer?.getData("text/question-id");
      if (questionId) hooks.onDrop(questionId, column);
    });
    const questions = Object.values(vm.questions)
      .filter((q) => q.state === column)
      .sort((a, b) => (a.id < b.id ? -1 : 1));
    for (const question of questions) {
      const card = el("div", {
        class: "question-card",
        draggable: "true",
        "data-question-id": question.id,
      });
      card.addEventListener("dragstart", (event) => {
        event.dataTransfer?.setData("text/question-id", question.id);
        hooks.onDragStart(question.id);
      });
      card.appendChild(el("p", { class: "question-text" }, question.text));
      const meta = question.scope
        ? `target ${vm.targets[question.scope]?.label ?? question.scope.slice(-6)}`
        : "case-wide";
      card.appendChild(el("p", { class: "question-meta" }, meta));
      const chips = el("div", { class: "chips" });
      for (const hypothesis of Object.values(vm.hypotheses)
        .filter((h) => h.question === question.id)
        .sort((a, b) => (a.id < b.id ? -1 : 1))) {
        chips.appendChild(
          el("span", { class: `chip chip-${hypothesis.state}` }, hypothesis.statement)
        );
      }
      card.appendChild(chips);
      col.appendChild(card);
    }
    container.appendChild(col);
  }
}

export function renderClosure(
  report: ClosureReport | null,
  vm: ViewModel,
  container: HTMLElement
): void {
  container.replaceChildren();
  if (report === null) {
    container.appendChild(el("p", { class: "muted" }, "closure state loading…"));
    return;
  }
  const headline = report.closed_allowed
    ? vm.state === "closed"
      ? "case closed"
      : "ready to close"
    : "blockers remain";
  container.appendChild(
    el("p", { class: report.closed_allowed ? "closure-ok" : "closure-blocked" }, headline)
  );
  const list = el("ul", { class: "closure-list" });
  for (const questionId of report.open_questions) {
    const text = vm.questions[questionId]?.text ?? questionId.slice(-6);
    list.appendChild(el("li", {}, `unanswered: ${text}`));
  }
  for (const targetId of report.unresolved_targets) {
    const label = vm.targets[targetId]?.label ?? targetId.slice(-6);
    list.appendChild(el("li", {}, `origin unproven: ${label}`));
  }
  for (const violation of report.violations) {
    list.appendChild(el("li", {}, `${violation.rule}: ${violation.message}`));
  }
  for (const warning of report.unsupported) {
    list.appendChild(
      el("li", { class: "muted" }, `no evidence on ${warning.entity} …${warning.id.slice(-6)}`)
    );
  }
  container.appendChild(list);
}

export function renderLegend(container: HTMLElement): void {
  container.replaceChildren();
  for (const [kind, legend] of Object.entries(LEAF_LEGEND)) {
    const item = el("span", { class: "legend-item" });
    const swatch = el("span", { class: "legend-swatch" }, legend.icon);
    swatch.style.backgroundColor = legend.color;
    item.appendChild(swatch);
    item.appendChild(el("span", {}, kind));
    container.appendChild(item);
  }
}
