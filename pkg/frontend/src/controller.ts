// UI logic, kept free of DOM access so the whole flow is testable against
// a recording view and a real (or faked) backend.
//
// Invariants enforced here:
// - while a generation request is in flight both action buttons are
//   disabled and further clicks are ignored (single in-flight request)
// - the method and provider lists come solely from the backend catalogs
// - the diagram shown is always rendered from server-provided text
// - visualization changes never call a provider: they go through
//   /api/render, debounced, and only the latest response is displayed

import { ApiClient, ApiError } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import { renderDiagram } from "./renderer/index.js";
import {
  defaultGeneration,
  defaultViz,
  type GenerationParams,
  type MethodInfo,
  type ProviderInfo,
  type ReasonResponse,
  type VizConfig,
} from "./types.js";

export interface DiagramInfo {
  nodeCount: number;
  edgeCount: number;
}

export interface View {
  setBusy(busy: boolean): void;
  setMethods(methods: MethodInfo[]): void;
  setProviders(providers: ProviderInfo[]): void;
  setSelectedMethod(method: string): void;
  showRawOutput(text: string): void;
  showDiagram(svg: string, info: DiagramInfo): void;
  clearDiagram(): void;
  showNotice(kind: "error" | "warning" | "info", message: string): void;
  clearNotices(): void;
  showAnalysis(text: string | null): void;
  setRenderControlsEnabled(enabled: boolean): void;
}

export interface UiState {
  question: string;
  method: string;
  provider: string;
  model: string;
  methodParams: Record<string, number>;
  generationParams: GenerationParams;
  viz: VizConfig;
  lastResponse: ReasonResponse | null;
  busy: boolean;
}

function describeAnalysis(response: ReasonResponse): string | null {
  const analysis = response.analysis;
  if (analysis === null || analysis === undefined) {
    return null;
  }
  if (analysis.kind === "path_score") {
    return `best path total score ${analysis.total.toFixed(2)} over ${analysis.path.length} nodes`;
  }
  if (analysis.kind === "majority_vote") {
    const counts = Object.entries(analysis.counts)
      .map(([answer, count]) => `${answer}: ${count}`)
      .join(", ");
    return `majority answer "${analysis.winner}"${analysis.tie ? " (tie)" : ""} — ${counts}`;
  }
  return null;
}

export class AppController {
  readonly state: UiState = {
    question: "",
    method: "",
    provider: "",
    model: "",
    methodParams: {},
    generationParams: defaultGeneration(),
    viz: defaultViz(),
    lastResponse: null,
    busy: false,
  };

  private renderSeq = 0;
  private currentDiagram: string | null = null;
  private readonly scheduleRender: Debounced<[]>;

  constructor(
    private readonly api: ApiClient,
    private readonly view: View,
    debounceMs = 250,
  ) {
    this.scheduleRender = debounce(() => {
      void this.rerender();
    }, debounceMs);
  }

  async init(): Promise<void> {
    const [methods, providers] = await Promise.all([
      this.api.getMethods(),
      this.api.getProviders(),
    ]);
    this.view.setMethods(methods);
    this.view.setProviders(providers);
    if (this.state.method === "" && methods.length > 0) {
      this.state.method = methods[0].method;
      this.view.setSelectedMethod(this.state.method);
    }
    const available = providers.find((p) => p.available) ?? providers[0];
    if (this.state.provider === "" && available !== undefined) {
      this.state.provider = available.id;
      this.state.model = available.models[0] ?? "";
    }
    this.view.setRenderControlsEnabled(false);
  }

  async startReasoning(): Promise<void> {
    await this.generateWith(() =>
      this.api.reason({
        question: this.state.question,
        method: this.state.method,
        provider: this.state.provider,
        model: this.state.model,
        method_params: this.state.methodParams,
        generation_params: this.state.generationParams,
        viz_config: this.state.viz,
      }),
    );
  }

  async metaReasoning(): Promise<void> {
    await this.generateWith(() =>
      this.api.metaReason({
        question: this.state.question,
        provider: this.state.provider,
        model: this.state.model,
        method_params: this.state.methodParams,
        generation_params: this.state.generationParams,
        viz_config: this.state.viz,
      }),
    );
  }

  private async generateWith(send: () => Promise<ReasonResponse>): Promise<void> {
    if (this.state.busy) {
      return;
    }
    this.view.clearNotices();
    if (this.state.question.trim() === "") {
      this.view.showNotice("error", "Enter a question first.");
      return;
    }
    this.state.busy = true;
    this.view.setBusy(true);
    try {
      const response = await send();
      this.applyResponse(response);
    } catch (error) {
      this.applyFailure(error);
    } finally {
      this.state.busy = false;
      this.view.setBusy(false);
    }
  }

  private applyResponse(response: ReasonResponse): void {
    this.state.lastResponse = response;
    this.view.showRawOutput(response.raw_output);
    this.view.setSelectedMethod(response.method_used);
    this.state.method = response.method_used;
    for (const diagnostic of response.diagnostics) {
      const kind = diagnostic.severity === "error" ? "error" : "warning";
      this.view.showNotice(kind, `${diagnostic.code}: ${diagnostic.message}`);
    }
    this.view.showAnalysis(describeAnalysis(response));
    if (response.trace === null || response.diagram === "") {
      this.currentDiagram = null;
      this.view.clearDiagram();
      this.view.showNotice("info", "No reasoning elements found in the model output.");
      this.view.setRenderControlsEnabled(false);
      return;
    }
    this.displayDiagram(response.diagram);
    this.view.setRenderControlsEnabled(true);
  }

  private applyFailure(error: unknown): void {
    if (error instanceof ApiError) {
      const body = error.body as { error?: string; message?: string; raw_output?: string } | null;
      if (error.status === 422 && body?.error === "meta_selection_failed") {
        this.view.showRawOutput(body.raw_output ?? "");
        this.view.showNotice("error", "The model did not pick a usable reasoning method.");
        return;
      }
      this.view.showNotice("error", body?.message ?? `request failed (HTTP ${error.status})`);
      return;
    }
    this.view.showNotice("error", `request failed: ${String(error)}`);
  }

  private displayDiagram(text: string): void {
    try {
      const rendered = renderDiagram(text);
      this.currentDiagram = text;
      this.view.showDiagram(rendered.svg, {
        nodeCount: rendered.nodeCount,
        edgeCount: rendered.edgeCount,
      });
    } catch (error) {
      this.currentDiagram = null;
      this.view.clearDiagram();
      this.view.showNotice("error", `cannot render diagram: ${String(error)}`);
    }
  }

  /** Called on every visualization-settings change; debounced. */
  onVizChanged(update: Partial<VizConfig>): void {
    Object.assign(this.state.viz, update);
    if (this.state.lastResponse?.trace == null) {
      return;
    }
    this.scheduleRender();
  }

  private async rerender(): Promise<void> {
    const trace = this.state.lastResponse?.trace;
    if (trace == null) {
      return;
    }
    const seq = ++this.renderSeq;
    try {
      const response = await this.api.render(trace, this.state.viz);
      if (seq !== this.renderSeq) {
        return; // superseded by a newer request
      }
      this.displayDiagram(response.text);
    } catch (error) {
      if (seq === this.renderSeq) {
        this.applyFailure(error);
      }
    }
  }

  /** SVG text of the current rendering, or null when nothing is shown. */
  exportSvg(): string | null {
    if (this.currentDiagram === null) {
      return null;
    }
    try {
      return renderDiagram(this.currentDiagram).svg;
    } catch {
      return null;
    }
  }
}
