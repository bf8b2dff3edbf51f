// SVG emission for a parsed + laid-out diagram. Pure string building, so
// export and tests work without a DOM.

import type { Layout } from "./layout.js";
import type { ClassStyle, ParsedDiagram, ParsedNode } from "./parse.js";

const DEFAULT_STYLE: Required<ClassStyle> = {
  fill: "#ffffff",
  stroke: "#333333",
  color: "#1a1a1a",
  strokeWidth: "1px",
};

const FONT = "13px 'Segoe UI', system-ui, sans-serif";
const LINE_H = 17;

function escapeXml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function styleFor(node: ParsedNode, diagram: ParsedDiagram): Required<ClassStyle> {
  const assigned = node.className === null ? undefined : diagram.classes.get(node.className);
  return { ...DEFAULT_STYLE, ...(assigned ?? {}) };
}

function cornerRadius(node: ParsedNode, height: number): number {
  if (node.shape === "stadium") {
    return height / 2;
  }
  if (node.shape === "rounded") {
    return 10;
  }
  return 4;
}

export function diagramToSvg(diagram: ParsedDiagram, layout: Layout): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `width="${layout.width}" height="${layout.height}" data-diagram-nodes="${diagram.nodes.length}">`,
  );
  parts.push(
    "<defs>" +
      '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ' +
      'markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#555555"/>' +
      "</marker>" +
      "</defs>",
  );

  parts.push('<g class="edges">');
  for (const edge of diagram.edges) {
    const from = layout.boxes.get(edge.from);
    const to = layout.boxes.get(edge.to);
    if (from === undefined || to === undefined) {
      continue;
    }
    let x1: number, y1: number, x2: number, y2: number;
    if (diagram.direction === "TD") {
      x1 = from.x + from.w / 2;
      y1 = from.y + from.h;
      x2 = to.x + to.w / 2;
      y2 = to.y;
    } else {
      x1 = from.x + from.w;
      y1 = from.y + from.h / 2;
      x2 = to.x;
      y2 = to.y + to.h / 2;
    }
    const stroke = edge.thick ? "#1e88e5" : "#555555";
    const width = edge.thick ? 2.5 : 1.5;
    parts.push(
      `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" stroke="${stroke}" ` +
        `stroke-width="${width}" marker-end="url(#arrow)"${edge.thick ? ' class="selected-edge"' : ""}/>`,
    );
  }
  parts.push("</g>");

  parts.push('<g class="nodes">');
  for (const node of diagram.nodes) {
    const box = layout.boxes.get(node.id);
    if (box === undefined) {
      continue;
    }
    const style = styleFor(node, diagram);
    const rx = cornerRadius(node, box.h);
    const classAttr = node.className === null ? "" : ` data-class="${escapeXml(node.className)}"`;
    parts.push(`<g data-node="${escapeXml(node.id)}"${classAttr}>`);
    parts.push(
      `<rect x="${box.x}" y="${box.y}" width="${box.w}" height="${box.h}" rx="${rx}" ` +
        `fill="${style.fill}" stroke="${style.stroke}" stroke-width="${style.strokeWidth}"/>`,
    );
    const centerX = box.x + box.w / 2;
    const firstLineY = box.y + box.h / 2 - ((node.lines.length - 1) * LINE_H) / 2;
    for (let i = 0; i < node.lines.length; i += 1) {
      parts.push(
        `<text x="${centerX}" y="${firstLineY + i * LINE_H}" fill="${style.color}" ` +
          `font="${FONT}" font-size="13" text-anchor="middle" dominant-baseline="middle">` +
          `${escapeXml(node.lines[i])}</text>`,
      );
    }
    parts.push("</g>");
  }
  parts.push("</g>");
  parts.push("</svg>");
  return parts.join("");
}
