import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { AppController, type DiagramInfo, type View } from "../src/controller.js";
import type { ReasonResponse } from "../src/types.js";

const DIAGRAM_TD =
  'flowchart TD\n    n0(["Q"])\n    n1["step one"]\n    n2(["done"])\n' +
  "    n0 --> n1\n    n1 --> n2\n" +
  "    classDef question fill:#90caf9,stroke:#333333\n" +
  "    classDef step fill:#eceff1,stroke:#333333\n" +
  "    classDef final fill:#a5d6a7,stroke:#333333\n" +
  "    class n0 question\n    class n1 step\n    class n2 final\n";

const DIAGRAM_LR = DIAGRAM_TD.replace("flowchart TD", "flowchart LR");

const TRACE = {
  method: "chain_of_thoughts",
  nodes: [
    { id: "n0", kind: "question", label: "Q", score: null, level: null, chain_index: null },
    { id: "n1", kind: "step", label: "step one", score: null, level: null, chain_index: null },
    { id: "n2", kind: "final_answer", label: "done", score: null, level: null, chain_index: null },
  ],
  edges: [
    { from: "n0", to: "n1", on_selected_path: false },
    { from: "n1", to: "n2", on_selected_path: false },
  ],
  selected_path: null,
};

const REASON_RESPONSE: ReasonResponse = {
  raw_output: "<step>step one</step><final_answer>done</final_answer>",
  trace: TRACE,
  diagram: DIAGRAM_TD,
  diagnostics: [],
  analysis: null,
  method_used: "chain_of_thoughts",
  timing: { generation_ms: 1, parse_ms: 1, emit_ms: 1 },
};

const METHODS = [
  { method: "chain_of_thoughts", display_name: "Chain of Thoughts", params: [] },
  { method: "beam_search", display_name: "Beam Search", params: [] },
];
const PROVIDERS = [
  { id: "mock", wire_protocol: "mock", models: ["mock-model"], available: true },
];

class RecordingView implements View {
  busyStates: boolean[] = [];
  methods: unknown = null;
  providers: unknown = null;
  selectedMethod = "";
  rawOutput = "";
  svg: string | null = null;
  diagramInfo: DiagramInfo | null = null;
  notices: Array<[string, string]> = [];
  analysis: string | null = null;
  renderControlsEnabled = false;

  setBusy(busy: boolean) {
    this.busyStates.push(busy);
  }
  setMethods(methods: unknown) {
    this.methods = methods;
  }
  setProviders(providers: unknown) {
    this.providers = providers;
  }
  setSelectedMethod(method: string) {
    this.selectedMethod = method;
  }
  showRawOutput(text: string) {
    this.rawOutput = text;
  }
  showDiagram(svg: string, info: DiagramInfo) {
    this.svg = svg;
    this.diagramInfo = info;
  }
  clearDiagram() {
    this.svg = null;
    this.diagramInfo = null;
  }
  showNotice(kind: "error" | "warning" | "info", message: string) {
    this.notices.push([kind, message]);
  }
  clearNotices() {
    this.notices = [];
  }
  showAnalysis(text: string | null) {
    this.analysis = text;
  }
  setRenderControlsEnabled(enabled: boolean) {
    this.renderControlsEnabled = enabled;
  }
}

interface Route {
  status?: number;
  body: unknown;
  delayMs?: number;
}

function fakeBackend(routes: Record<string, Route | Route[]>) {
  const log: string[] = [];
  const counters = new Map<string, number>();
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    log.push(`${init?.method ?? "GET"} ${path}`);
    const route = routes[path];
    if (route === undefined) {
      return new Response(JSON.stringify({ error: "not_found" }), { status: 404 });
    }
    const index = counters.get(path) ?? 0;
    counters.set(path, index + 1);
    const selected = Array.isArray(route) ? route[Math.min(index, route.length - 1)] : route;
    if (selected.delayMs !== undefined) {
      await new Promise((resolve) => setTimeout(resolve, selected.delayMs));
    }
    return new Response(JSON.stringify(selected.body), {
      status: selected.status ?? 200,
      headers: { "content-type": "application/json" },
    });
  };
  return { fetchImpl, log };
}

function setup(routes: Record<string, Route | Route[]>, debounceMs = 0) {
  const backend = fakeBackend({
    "/api/methods": { body: METHODS },
    "/api/providers": { body: PROVIDERS },
    ...routes,
  });
  const view = new RecordingView();
  const controller = new AppController(new ApiClient("", backend.fetchImpl), view, debounceMs);
  return { backend, view, controller };
}

describe("AppController.init", () => {
  it("populates method and provider lists solely from the catalogs", async () => {
    const { backend, view, controller } = setup({});
    await controller.init();
    expect(view.methods).toEqual(METHODS);
    expect(view.providers).toEqual(PROVIDERS);
    expect(controller.state.method).toBe("chain_of_thoughts");
    expect(controller.state.provider).toBe("mock");
    expect(backend.log).toEqual(["GET /api/methods", "GET /api/providers"]);
  });
});

describe("start reasoning", () => {
  it("renders the diagram and shows raw output verbatim", async () => {
    const { view, controller } = setup({ "/api/reason": { body: REASON_RESPONSE } });
    await controller.init();
    controller.state.question = "What is 2+2?";
    await controller.startReasoning();
    expect(view.rawOutput).toBe(REASON_RESPONSE.raw_output);
    expect(view.diagramInfo?.nodeCount).toBe(3);
    expect(view.svg).toContain("<svg");
    expect(view.renderControlsEnabled).toBe(true);
    expect(view.busyStates).toEqual([true, false]);
  });

  it("does not send a request for an empty question", async () => {
    const { backend, view, controller } = setup({ "/api/reason": { body: REASON_RESPONSE } });
    await controller.init();
    controller.state.question = "   ";
    await controller.startReasoning();
    expect(backend.log.filter((l) => l.includes("/api/reason"))).toEqual([]);
    expect(view.notices).toEqual([["error", "Enter a question first."]]);
  });

  it("ignores a second click while busy", async () => {
    const { backend, controller } = setup({
      "/api/reason": { body: REASON_RESPONSE, delayMs: 20 },
    });
    await controller.init();
    controller.state.question = "q";
    const first = controller.startReasoning();
    const second = controller.startReasoning();
    await Promise.all([first, second]);
    expect(backend.log.filter((l) => l === "POST /api/reason")).toHaveLength(1);
  });

  it("shows raw output plus a notice on non-conforming output", async () => {
    const { view, controller } = setup({
      "/api/reason": {
        body: {
          ...REASON_RESPONSE,
          trace: null,
          diagram: "",
          diagnostics: [
            { code: "no_elements", severity: "error", message: "nothing", span: null, subject: null },
          ],
          raw_output: "free-form chatter",
        },
      },
    });
    await controller.init();
    controller.state.question = "q";
    await controller.startReasoning();
    expect(view.rawOutput).toBe("free-form chatter");
    expect(view.svg).toBeNull();
    expect(view.notices.some(([, msg]) => msg.includes("No reasoning elements"))).toBe(true);
    expect(view.renderControlsEnabled).toBe(false);
  });
});

describe("meta reasoning", () => {
  it("updates the method dropdown to the selected method", async () => {
    const { view, controller } = setup({
      "/api/meta-reason": { body: { ...REASON_RESPONSE, method_used: "beam_search" } },
    });
    await controller.init();
    controller.state.question = "q";
    await controller.metaReasoning();
    expect(view.selectedMethod).toBe("beam_search");
    expect(controller.state.method).toBe("beam_search");
  });

  it("shows phase-1 text and a banner on selection failure", async () => {
    const { view, controller } = setup({
      "/api/meta-reason": {
        status: 422,
        body: { error: "meta_selection_failed", message: "nope", raw_output: "phase one text" },
      },
    });
    await controller.init();
    controller.state.question = "q";
    await controller.metaReasoning();
    expect(view.rawOutput).toBe("phase one text");
    expect(view.notices.some(([kind]) => kind === "error")).toBe(true);
  });
});

describe("visualization settings", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("re-renders through /api/render only, debounced", async () => {
    const { backend, view, controller } = setup(
      {
        "/api/reason": { body: REASON_RESPONSE },
        "/api/render": { body: { text: DIAGRAM_LR, id_map: {}, styles: [] } },
      },
      250,
    );
    await controller.init();
    controller.state.question = "q";
    await controller.startReasoning();
    const before = backend.log.length;

    for (let i = 0; i < 10; i += 1) {
      controller.onVizChanged({ wrap_width: 20 + i });
      vi.advanceTimersByTime(20);
    }
    controller.onVizChanged({ direction: "left_right" });
    await vi.advanceTimersByTimeAsync(300);

    const after = backend.log.slice(before);
    expect(after).toEqual(["POST /api/render"]);
    expect(view.svg).toContain("<svg");
  });

  it("does nothing when no trace is loaded", async () => {
    const { backend, controller } = setup({}, 0);
    await controller.init();
    controller.onVizChanged({ direction: "left_right" });
    await vi.advanceTimersByTimeAsync(100);
    expect(backend.log.filter((l) => l.includes("render"))).toEqual([]);
  });

  it("only the latest render response is displayed", async () => {
    vi.useRealTimers();
    const { view, controller } = setup(
      {
        "/api/reason": { body: REASON_RESPONSE },
        "/api/render": [
          { body: { text: DIAGRAM_TD, id_map: {}, styles: [] }, delayMs: 60 },
          { body: { text: DIAGRAM_LR, id_map: {}, styles: [] }, delayMs: 5 },
        ],
      },
      0,
    );
    await controller.init();
    controller.state.question = "q";
    await controller.startReasoning();

    controller.onVizChanged({ direction: "top_down" });
    await new Promise((resolve) => setTimeout(resolve, 10));
    controller.onVizChanged({ direction: "left_right" });
    await new Promise((resolve) => setTimeout(resolve, 120));

    // the slow first response must not overwrite the fast second one;
    // LR layouts are wider than tall for this chain
    const match = view.svg?.match(/viewBox="0 0 ([\d.]+) ([\d.]+)"/);
    expect(match).not.toBeNull();
    const [width, height] = [Number(match![1]), Number(match![2])];
    expect(width).toBeGreaterThan(height);
  });
});

describe("export", () => {
  it("yields a non-empty SVG after a render, and null before", async () => {
    const { controller } = setup({ "/api/reason": { body: REASON_RESPONSE } });
    await controller.init();
    expect(controller.exportSvg()).toBeNull();
    controller.state.question = "q";
    await controller.startReasoning();
    const svg = controller.exportSvg();
    expect(svg).not.toBeNull();
    expect(svg!.length).toBeGreaterThan(100);
    expect(svg!.startsWith("<svg")).toBe(true);
  });
});
