import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { layoutDiagram, parseDiagram, renderDiagram } from "../src/renderer/index.js";

const GOLDEN_DIR = join(__dirname, "..", "..", "docs", "diagram-format");

function golden(name: string): string {
  return readFileSync(join(GOLDEN_DIR, `${name}.mmd`), "utf-8");
}

describe("parseDiagram", () => {
  it("reads the golden chain diagram", () => {
    const diagram = parseDiagram(golden("golden-chain"));
    expect(diagram.direction).toBe("TD");
    expect(diagram.nodes).toHaveLength(4);
    expect(diagram.edges).toHaveLength(3);
    expect(diagram.nodes[0].shape).toBe("stadium");
    expect(diagram.nodes[0].className).toBe("question");
    expect(diagram.classes.get("question")?.fill).toBe("#90caf9");
  });

  it("reads direction and thick edges from the golden beam diagram", () => {
    const diagram = parseDiagram(golden("golden-beam"));
    expect(diagram.edges.filter((e) => e.thick)).toHaveLength(3);
    const selected = diagram.nodes.filter((n) => n.className === "selected");
    expect(selected.map((n) => n.id)).toEqual(["n2", "n4"]);
  });

  it("reads the left-right golden diagram", () => {
    expect(parseDiagram(golden("golden-refine")).direction).toBe("LR");
  });

  it("decodes labels", () => {
    const diagram = parseDiagram(
      'flowchart TD\n    n0(["say #quot;hi#quot; #lt;now#gt; a #amp; b<br/>second line"])\n',
    );
    expect(diagram.nodes[0].lines).toEqual(['say "hi" <now> a & b', "second line"]);
  });

  it("rejects unknown headers", () => {
    expect(() => parseDiagram("graph TD\n")).toThrow(/header/);
  });

  it("rejects statements outside the subset", () => {
    expect(() => parseDiagram("flowchart TD\n    subgraph nope\n")).toThrow(/unsupported/);
  });

  it("rejects edges to unknown nodes", () => {
    expect(() => parseDiagram('flowchart TD\n    a["x"]\n    a --> ghost\n')).toThrow(/unknown/);
  });
});

describe("layoutDiagram", () => {
  it("keeps boxes on distinct levels without overlap", () => {
    const diagram = parseDiagram(golden("golden-beam"));
    const layout = layoutDiagram(diagram);
    expect(layout.boxes.size).toBe(6);
    const boxes = [...layout.boxes.values()];
    for (const a of boxes) {
      for (const b of boxes) {
        if (a.id >= b.id) continue;
        const overlap =
          a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
        expect(overlap, `${a.id} overlaps ${b.id}`).toBe(false);
      }
    }
  });

  it("orders levels along the flow axis", () => {
    const diagram = parseDiagram(golden("golden-chain"));
    const layout = layoutDiagram(diagram);
    const ys = ["n0", "n1", "n2", "n3"].map((id) => layout.boxes.get(id)!.y);
    expect([...ys].sort((a, b) => a - b)).toEqual(ys);
  });

  it("lays left-right diagrams along x", () => {
    const diagram = parseDiagram(golden("golden-refine"));
    const layout = layoutDiagram(diagram);
    const xs = ["n0", "n1", "n2", "n3", "n4"].map((id) => layout.boxes.get(id)!.x);
    expect([...xs].sort((a, b) => a - b)).toEqual(xs);
  });
});

describe("renderDiagram", () => {
  it("produces SVG with one group per node", () => {
    for (const name of ["golden-chain", "golden-refine", "golden-beam"]) {
      const rendered = renderDiagram(golden(name));
      expect(rendered.svg.startsWith("<svg")).toBe(true);
      expect(rendered.svg.match(/data-node=/g)).toHaveLength(rendered.nodeCount);
      expect(rendered.svg).toContain(`data-diagram-nodes="${rendered.nodeCount}"`);
    }
  });

  it("marks selected edges", () => {
    const rendered = renderDiagram(golden("golden-beam"));
    expect(rendered.svg.match(/selected-edge/g)).toHaveLength(3);
  });

  it("escapes label text in the SVG", () => {
    const rendered = renderDiagram('flowchart TD\n    n0(["a #lt;tag#gt; #amp; b"])\n');
    expect(rendered.svg).toContain("a &lt;tag&gt; &amp; b");
  });

  it("is deterministic", () => {
    const text = golden("golden-beam");
    expect(renderDiagram(text).svg).toBe(renderDiagram(text).svg);
  });
});
