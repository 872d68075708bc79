/**
 * Deterministic layered layout for the attack graph: attacker in layer 0,
 * each target in the layer of its shortest edge distance from the attacker
 * (unreachable targets go to a trailing layer), id order within a layer.
 * Same case, same pixels - screenshots are reproducible.
 */

import type { ViewModel } from "./viewmodel.js";

export interface NodePosition {
  id: string; // "attacker" or target id
  x: number;
  y: number;
}

export interface LayoutConfig {
  columnWidth: number;
  rowHeight: number;
  marginX: number;
  marginY: number;
}

export const DEFAULT_LAYOUT: LayoutConfig = {
  columnWidth: 240,
  rowHeight: 150,
  marginX: 40,
  marginY: 40,
};

export function layerAssignment(vm: ViewModel): Map<string, number> {
  const layers = new Map<string, number>();
  layers.set("attacker", 0);
  const adjacency = new Map<string, string[]>();
  for (const edgeId of Object.keys(vm.edges).sort()) {
    const edge = vm.edges[edgeId];
    if (!(edge.dest in vm.targets)) continue;
    if (edge.source !== "attacker" && !(edge.source in vm.targets)) continue;
    const out = adjacency.get(edge.source) ?? [];
    out.push(edge.dest);
    adjacency.set(edge.source, out);
  }
  let frontier = ["attacker"];
  let depth = 0;
  while (frontier.length > 0) {
    depth += 1;
    const next: string[] = [];
    for (const node of frontier) {
      for (const dest of adjacency.get(node) ?? []) {
        if (!layers.has(dest)) {
          layers.set(dest, depth);
          next.push(dest);
        }
      }
    }
    frontier = next.sort();
  }
  const unplaced = Object.keys(vm.targets).filter((tid) => !layers.has(tid));
  for (const tid of unplaced.sort()) layers.set(tid, depth + 1);
  return layers;
}

export function layout(vm: ViewModel, config: LayoutConfig = DEFAULT_LAYOUT): NodePosition[] {
  const layers = layerAssignment(vm);
  const byLayer = new Map<number, string[]>();
  for (const [node, layer] of layers) {
    const row = byLayer.get(layer) ?? [];
    row.push(node);
    byLayer.set(layer, row);
  }
  const positions: NodePosition[] = [];
  for (const [layer, nodes] of [...byLayer.entries()].sort((a, b) => a[0] - b[0])) {
    nodes.sort();
    nodes.forEach((node, index) => {
      positions.push({
        id: node,
        x: config.marginX + layer * config.columnWidth,
        y: config.marginY + index * config.rowHeight,
      });
    });
  }
  return positions;
}
