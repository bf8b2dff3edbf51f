// Parser for the flowchart subset the backend emits (documented in
// docs/diagram-format): a header line, node statements in three shapes,
// plain/thick edges, classDef and class statements. Anything outside the
// subset throws, which the controller surfaces as a notice; the server
// text itself is never modified client-side.

export type Shape = "stadium" | "rect" | "rounded";

export interface ParsedNode {
  id: string;
  lines: string[];
  shape: Shape;
  className: string | null;
}

export interface ParsedEdge {
  from: string;
  to: string;
  thick: boolean;
}

export interface ClassStyle {
  fill?: string;
  stroke?: string;
  color?: string;
  strokeWidth?: string;
}

export interface ParsedDiagram {
  direction: "TD" | "LR";
  nodes: ParsedNode[];
  edges: ParsedEdge[];
  classes: Map<string, ClassStyle>;
}

const SHAPE_BRACKETS: Array<[Shape, string, string]> = [
  ["stadium", '(["', '"])'],
  ["rect", '["', '"]'],
  ["rounded", '("', '")'],
];

function decodeLabel(raw: string): string[] {
  return raw.split("<br/>").map((line) =>
    line
      .replaceAll("#quot;", '"')
      .replaceAll("#lt;", "<")
      .replaceAll("#gt;", ">")
      .replaceAll("#amp;", "&"),
  );
}

function parseClassDef(rest: string): [string, ClassStyle] {
  const space = rest.indexOf(" ");
  if (space < 0) {
    throw new Error(`classDef without a body: ${rest}`);
  }
  const name = rest.slice(0, space);
  const style: ClassStyle = {};
  for (const item of rest.slice(space + 1).split(",")) {
    const colon = item.indexOf(":");
    if (colon < 0) {
      continue;
    }
    const key = item.slice(0, colon).trim();
    const value = item.slice(colon + 1).trim();
    if (key === "fill") style.fill = value;
    else if (key === "stroke") style.stroke = value;
    else if (key === "color") style.color = value;
    else if (key === "stroke-width") style.strokeWidth = value;
  }
  return [name, style];
}

function parseNodeStatement(stmt: string): ParsedNode | null {
  let idEnd = 0;
  while (idEnd < stmt.length && /[A-Za-z0-9_]/.test(stmt[idEnd])) {
    idEnd += 1;
  }
  if (idEnd === 0) {
    return null;
  }
  const id = stmt.slice(0, idEnd);
  const rest = stmt.slice(idEnd);
  for (const [shape, open, close] of SHAPE_BRACKETS) {
    if (rest.startsWith(open) && rest.endsWith(close)) {
      const raw = rest.slice(open.length, rest.length - close.length);
      return { id, lines: decodeLabel(raw), shape, className: null };
    }
  }
  return null;
}

export function parseDiagram(text: string): ParsedDiagram {
  const lines = text.split("\n");
  const header = lines[0]?.trim();
  let direction: "TD" | "LR";
  if (header === "flowchart TD") {
    direction = "TD";
  } else if (header === "flowchart LR") {
    direction = "LR";
  } else {
    throw new Error(`unsupported diagram header: ${header ?? "(empty)"}`);
  }

  const nodes: ParsedNode[] = [];
  const byId = new Map<string, ParsedNode>();
  const edges: ParsedEdge[] = [];
  const classes = new Map<string, ClassStyle>();
  const assignments: Array<[string[], string]> = [];

  for (const rawLine of lines.slice(1)) {
    const stmt = rawLine.trim();
    if (stmt === "") {
      continue;
    }
    if (stmt.startsWith("classDef ")) {
      const [name, style] = parseClassDef(stmt.slice("classDef ".length));
      classes.set(name, style);
      continue;
    }
    if (stmt.startsWith("class ")) {
      const fields = stmt.split(/\s+/);
      if (fields.length !== 3) {
        throw new Error(`unsupported class statement: ${stmt}`);
      }
      assignments.push([fields[1].split(","), fields[2]]);
      continue;
    }
    const arrow = stmt.includes(" --> ") ? " --> " : stmt.includes(" ==> ") ? " ==> " : null;
    if (arrow !== null) {
      const [from, to] = stmt.split(arrow);
      if (!from || !to || from.includes(" ") || to.includes(" ")) {
        throw new Error(`unsupported edge statement: ${stmt}`);
      }
      edges.push({ from, to, thick: arrow === " ==> " });
      continue;
    }
    const node = parseNodeStatement(stmt);
    if (node === null) {
      throw new Error(`unsupported statement: ${stmt}`);
    }
    nodes.push(node);
    byId.set(node.id, node);
  }

  for (const [ids, name] of assignments) {
    for (const id of ids) {
      const node = byId.get(id);
      if (node === undefined) {
        throw new Error(`class statement references unknown node ${id}`);
      }
      node.className = name;
    }
  }
  for (const edge of edges) {
    if (!byId.has(edge.from) || !byId.has(edge.to)) {
      throw new Error(`edge references unknown node: ${edge.from} -> ${edge.to}`);
    }
  }
  return { direction, nodes, edges, classes };
}
