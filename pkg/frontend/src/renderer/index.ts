// renderDiagram: server-emitted flowchart text in, SVG string out.

import { layoutDiagram } from "./layout.js";
import { parseDiagram } from "./parse.js";
import { diagramToSvg } from "./svg.js";

export interface RenderedDiagram {
  svg: string;
  nodeCount: number;
  edgeCount: number;
  width: number;
  height: number;
}

export function renderDiagram(text: string): RenderedDiagram {
  const diagram = parseDiagram(text);
  const layout = layoutDiagram(diagram);
  return {
    svg: diagramToSvg(diagram, layout),
    nodeCount: diagram.nodes.length,
    edgeCount: diagram.edges.length,
    width: layout.width,
    height: layout.height,
  };
}

export { parseDiagram } from "./parse.js";
export { layoutDiagram } from "./layout.js";
export { diagramToSvg } from "./svg.js";
export type { ParsedDiagram, ParsedNode, ParsedEdge } from "./parse.js";
