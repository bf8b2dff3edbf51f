// Layered layout: nodes sit on levels given by their longest path from
// the roots, matching how the backend assigns tree depths, so the drawn
// picture agrees with the trace's own level semantics.

import type { ParsedDiagram } from "./parse.js";

export interface Box {
  id: string;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Layout {
  boxes: Map<string, Box>;
  width: number;
  height: number;
}

const CHAR_W = 7.5;
const LINE_H = 17;
const PAD_X = 14;
const PAD_Y = 9;
const GAP_MAIN = 48; // between levels, along the flow direction
const GAP_CROSS = 26; // between siblings within a level
const MARGIN = 16;

function nodeSize(lines: string[]): [number, number] {
  const longest = Math.max(1, ...lines.map((line) => line.length));
  return [longest * CHAR_W + 2 * PAD_X, lines.length * LINE_H + 2 * PAD_Y];
}

function levelsByLongestPath(diagram: ParsedDiagram): Map<string, number> {
  const indegree = new Map<string, number>();
  const outgoing = new Map<string, string[]>();
  for (const node of diagram.nodes) {
    indegree.set(node.id, 0);
    outgoing.set(node.id, []);
  }
  for (const edge of diagram.edges) {
    indegree.set(edge.to, (indegree.get(edge.to) ?? 0) + 1);
    outgoing.get(edge.from)?.push(edge.to);
  }
  const levels = new Map<string, number>();
  const queue: string[] = [];
  for (const node of diagram.nodes) {
    if ((indegree.get(node.id) ?? 0) === 0) {
      levels.set(node.id, 0);
      queue.push(node.id);
    }
  }
  while (queue.length > 0) {
    const current = queue.shift() as string;
    for (const next of outgoing.get(current) ?? []) {
      const candidate = (levels.get(current) ?? 0) + 1;
      if (candidate > (levels.get(next) ?? -1)) {
        levels.set(next, candidate);
      }
      indegree.set(next, (indegree.get(next) ?? 1) - 1);
      if (indegree.get(next) === 0) {
        queue.push(next);
      }
    }
  }
  // nodes trapped in cycles (the backend validates against them, but the
  // renderer should still not hang): dump them on level 0
  for (const node of diagram.nodes) {
    if (!levels.has(node.id)) {
      levels.set(node.id, 0);
    }
  }
  return levels;
}

export function layoutDiagram(diagram: ParsedDiagram): Layout {
  const levels = levelsByLongestPath(diagram);
  const rows = new Map<number, string[]>();
  for (const node of diagram.nodes) {
    const level = levels.get(node.id) ?? 0;
    if (!rows.has(level)) {
      rows.set(level, []);
    }
    rows.get(level)?.push(node.id);
  }
  const sizes = new Map<string, [number, number]>();
  for (const node of diagram.nodes) {
    sizes.set(node.id, nodeSize(node.lines));
  }

  const vertical = diagram.direction === "TD";
  const boxes = new Map<string, Box>();
  const orderedLevels = [...rows.keys()].sort((a, b) => a - b);

  // extent of each level along the flow axis, and of its row across it
  let mainCursor = MARGIN;
  let crossExtent = 0;
  const rowCross = new Map<number, number>();
  for (const level of orderedLevels) {
    const ids = rows.get(level) ?? [];
    let rowCrossLen = 0;
    for (const id of ids) {
      const [w, h] = sizes.get(id) as [number, number];
      rowCrossLen += (vertical ? w : h) + GAP_CROSS;
    }
    rowCrossLen -= GAP_CROSS;
    rowCross.set(level, rowCrossLen);
    crossExtent = Math.max(crossExtent, rowCrossLen);
  }

  for (const level of orderedLevels) {
    const ids = rows.get(level) ?? [];
    const rowLen = rowCross.get(level) ?? 0;
    let cross = MARGIN + (crossExtent - rowLen) / 2;
    let mainThickness = 0;
    for (const id of ids) {
      const [w, h] = sizes.get(id) as [number, number];
      if (vertical) {
        boxes.set(id, { id, x: cross, y: mainCursor, w, h });
        cross += w + GAP_CROSS;
        mainThickness = Math.max(mainThickness, h);
      } else {
        boxes.set(id, { id, x: mainCursor, y: cross, w, h });
        cross += h + GAP_CROSS;
        mainThickness = Math.max(mainThickness, w);
      }
    }
    mainCursor += mainThickness + GAP_MAIN;
  }
  const mainExtent = mainCursor - GAP_MAIN + MARGIN;
  const crossTotal = crossExtent + 2 * MARGIN;
  return {
    boxes,
    width: vertical ? crossTotal : mainExtent,
    height: vertical ? mainExtent : crossTotal,
  };
}
