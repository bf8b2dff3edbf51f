// Browser bootstrap: binds the controller to the two-column layout in
// index.html (header with query input + method dropdown + two action
// buttons; left column reasoning settings over raw output; right column
// visualization settings over results with zoom/reset/export).

import { ApiClient } from "./api.js";
import { AppController, type DiagramInfo, type View } from "./controller.js";
import type { MethodInfo, ProviderInfo } from "./types.js";
import { pan, reset, toTransform, zoomAt, type Viewport } from "./zoom.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function download(filename: string, mime: string, data: Blob): void {
  const url = URL.createObjectURL(data);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  setTimeout(() => URL.revokeObjectURL(url), 5_000);
}

class DomView implements View {
  private methods: MethodInfo[] = [];
  private providers: ProviderInfo[] = [];
  private viewport: Viewport = reset();

  readonly question = el<HTMLInputElement>("question");
  readonly methodSelect = el<HTMLSelectElement>("method");
  readonly startButton = el<HTMLButtonElement>("start-reasoning");
  readonly metaButton = el<HTMLButtonElement>("meta-reasoning");
  readonly providerSelect = el<HTMLSelectElement>("provider");
  readonly modelSelect = el<HTMLSelectElement>("model");
  readonly temperature = el<HTMLInputElement>("temperature");
  readonly maxTokens = el<HTMLInputElement>("max-tokens");
  readonly methodParams = el<HTMLDivElement>("method-params");
  readonly rawOutput = el<HTMLPreElement>("raw-output");
  readonly direction = el<HTMLSelectElement>("direction");
  readonly wrapWidth = el<HTMLInputElement>("wrap-width");
  readonly wrapWidthValue = el<HTMLSpanElement>("wrap-width-value");
  readonly showScores = el<HTMLInputElement>("show-scores");
  readonly maxLabelChars = el<HTMLInputElement>("max-label-chars");
  readonly results = el<HTMLDivElement>("results");
  readonly notices = el<HTMLDivElement>("notices");
  readonly analysis = el<HTMLDivElement>("analysis");
  readonly zoomIn = el<HTMLButtonElement>("zoom-in");
  readonly zoomOut = el<HTMLButtonElement>("zoom-out");
  readonly zoomReset = el<HTMLButtonElement>("zoom-reset");
  readonly exportSvgButton = el<HTMLButtonElement>("export-svg");
  readonly exportPngButton = el<HTMLButtonElement>("export-png");

  setBusy(busy: boolean): void {
    this.startButton.disabled = busy;
    this.metaButton.disabled = busy;
    document.body.classList.toggle("busy", busy);
  }

  setMethods(methods: MethodInfo[]): void {
    this.methods = methods;
    this.methodSelect.replaceChildren(
      ...methods.map((m) => new Option(m.display_name, m.method)),
    );
    this.renderMethodParams();
  }

  setProviders(providers: ProviderInfo[]): void {
    this.providers = providers;
    this.providerSelect.replaceChildren(
      ...providers.map(
        (p) => new Option(p.available ? p.id : `${p.id} (unavailable)`, p.id),
      ),
    );
    this.syncModels();
  }

  syncModels(): void {
    const provider = this.providers.find((p) => p.id === this.providerSelect.value);
    this.modelSelect.replaceChildren(
      ...(provider?.models ?? []).map((m) => new Option(m, m)),
    );
  }

  setSelectedMethod(method: string): void {
    this.methodSelect.value = method;
    this.renderMethodParams();
  }

  renderMethodParams(): void {
    const info = this.methods.find((m) => m.method === this.methodSelect.value);
    this.methodParams.replaceChildren();
    for (const param of info?.params ?? []) {
      const label = document.createElement("label");
      label.textContent = param.name.replaceAll("_", " ");
      const input = document.createElement("input");
      input.type = "number";
      input.min = String(param.minimum);
      input.dataset.param = param.name;
      if (param.default !== null) {
        input.value = String(param.default);
      }
      label.appendChild(input);
      this.methodParams.appendChild(label);
    }
  }

  collectMethodParams(): Record<string, number> {
    const params: Record<string, number> = {};
    for (const input of this.methodParams.querySelectorAll("input")) {
      const name = input.dataset.param;
      if (name !== undefined && input.value !== "") {
        params[name] = Number(input.value);
      }
    }
    return params;
  }

  showRawOutput(text: string): void {
    this.rawOutput.textContent = text;
  }

  showDiagram(svg: string, info: DiagramInfo): void {
    this.results.innerHTML = svg;
    this.results.dataset.nodeCount = String(info.nodeCount);
    this.viewport = reset();
    this.applyViewport();
    this.setExportEnabled(true);
  }

  clearDiagram(): void {
    this.results.replaceChildren();
    delete this.results.dataset.nodeCount;
    this.setExportEnabled(false);
  }

  setExportEnabled(enabled: boolean): void {
    this.exportSvgButton.disabled = !enabled;
    this.exportPngButton.disabled = !enabled;
    this.zoomIn.disabled = !enabled;
    this.zoomOut.disabled = !enabled;
    this.zoomReset.disabled = !enabled;
  }

  setRenderControlsEnabled(enabled: boolean): void {
    for (const control of [this.direction, this.wrapWidth, this.showScores, this.maxLabelChars]) {
      control.disabled = !enabled;
    }
  }

  showNotice(kind: "error" | "warning" | "info", message: string): void {
    const line = document.createElement("div");
    line.className = `notice notice-${kind}`;
    line.textContent = message;
    this.notices.appendChild(line);
  }

  clearNotices(): void {
    this.notices.replaceChildren();
  }

  showAnalysis(text: string | null): void {
    this.analysis.textContent = text ?? "";
  }

  svgElement(): SVGSVGElement | null {
    return this.results.querySelector("svg");
  }

  applyViewport(): void {
    const svg = this.svgElement();
    if (svg === null) {
      return;
    }
    let group = svg.querySelector<SVGGElement>("g[data-viewport]");
    if (group === null) {
      group = document.createElementNS("http://www.w3.org/2000/svg", "g");
      group.dataset.viewport = "1";
      while (svg.firstChild) {
        group.appendChild(svg.firstChild);
      }
      svg.appendChild(group);
    }
    group.setAttribute("transform", toTransform(this.viewport));
  }

  zoomBy(factor: number): void {
    const rect = this.results.getBoundingClientRect();
    this.viewport = zoomAt(this.viewport, factor, rect.width / 2, rect.height / 2);
    this.applyViewport();
  }

  panBy(dx: number, dy: number): void {
    this.viewport = pan(this.viewport, dx, dy);
    this.applyViewport();
  }

  resetView(): void {
    this.viewport = reset();
    this.applyViewport();
  }
}

function exportPng(svgText: string, scale = 2): void {
  const blob = new Blob([svgText], { type: "image/svg+xml" });
  const url = URL.createObjectURL(blob);
  const image = new Image();
  image.onload = () => {
    const canvas = document.createElement("canvas");
    canvas.width = image.width * scale;
    canvas.height = image.height * scale;
    const context = canvas.getContext("2d");
    if (context !== null) {
      context.scale(scale, scale);
      context.drawImage(image, 0, 0);
      canvas.toBlob((png) => {
        if (png !== null) {
          download("reasoning.png", "image/png", png);
        }
      }, "image/png");
    }
    URL.revokeObjectURL(url);
  };
  image.src = url;
}

async function boot(): Promise<void> {
  const view = new DomView();
  const controller = new AppController(new ApiClient(""), view);

  view.question.addEventListener("input", () => {
    controller.state.question = view.question.value;
  });
  view.methodSelect.addEventListener("change", () => {
    controller.state.method = view.methodSelect.value;
    view.renderMethodParams();
  });
  view.providerSelect.addEventListener("change", () => {
    controller.state.provider = view.providerSelect.value;
    view.syncModels();
    controller.state.model = view.modelSelect.value;
  });
  view.modelSelect.addEventListener("change", () => {
    controller.state.model = view.modelSelect.value;
  });
  view.temperature.addEventListener("change", () => {
    controller.state.generationParams.temperature = Number(view.temperature.value);
  });
  view.maxTokens.addEventListener("change", () => {
    controller.state.generationParams.max_tokens = Number(view.maxTokens.value);
  });
  view.methodParams.addEventListener("change", () => {
    controller.state.methodParams = view.collectMethodParams();
  });

  view.startButton.addEventListener("click", () => {
    controller.state.methodParams = view.collectMethodParams();
    void controller.startReasoning();
  });
  view.metaButton.addEventListener("click", () => {
    controller.state.methodParams = view.collectMethodParams();
    void controller.metaReasoning();
  });

  view.direction.addEventListener("change", () => {
    controller.onVizChanged({
      direction: view.direction.value as "top_down" | "left_right",
    });
  });
  view.wrapWidth.addEventListener("input", () => {
    view.wrapWidthValue.textContent = view.wrapWidth.value;
    controller.onVizChanged({ wrap_width: Number(view.wrapWidth.value) });
  });
  view.showScores.addEventListener("change", () => {
    controller.onVizChanged({ show_scores: view.showScores.checked });
  });
  view.maxLabelChars.addEventListener("change", () => {
    controller.onVizChanged({ max_label_chars: Number(view.maxLabelChars.value) });
  });

  view.zoomIn.addEventListener("click", () => view.zoomBy(1.25));
  view.zoomOut.addEventListener("click", () => view.zoomBy(0.8));
  view.zoomReset.addEventListener("click", () => view.resetView());
  view.exportSvgButton.addEventListener("click", () => {
    const svg = controller.exportSvg();
    if (svg !== null) {
      download("reasoning.svg", "image/svg+xml", new Blob([svg], { type: "image/svg+xml" }));
    }
  });
  view.exportPngButton.addEventListener("click", () => {
    const svg = controller.exportSvg();
    if (svg !== null) {
      exportPng(svg);
    }
  });

  let dragging: [number, number] | null = null;
  view.results.addEventListener("pointerdown", (event) => {
    dragging = [event.clientX, event.clientY];
  });
  view.results.addEventListener("pointermove", (event) => {
    if (dragging !== null) {
      view.panBy(event.clientX - dragging[0], event.clientY - dragging[1]);
      dragging = [event.clientX, event.clientY];
    }
  });
  for (const kind of ["pointerup", "pointerleave"] as const) {
    view.results.addEventListener(kind, () => {
      dragging = null;
    });
  }
  view.results.addEventListener("wheel", (event) => {
    event.preventDefault();
    view.zoomBy(event.deltaY < 0 ? 1.15 : 0.87);
  });

  view.setExportEnabled(false);
  view.setRenderControlsEnabled(false);
  await controller.init();
  controller.state.provider = view.providerSelect.value;
  controller.state.model = view.modelSelect.value;
}

void boot();
