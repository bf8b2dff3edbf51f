// Thin typed client for the backend; every UI network interaction goes
// through here, which is what lets tests assert "settings changes hit
// /api/render only".

import type {
  GenerationParams,
  MethodInfo,
  ProviderInfo,
  ReasonResponse,
  RenderResponse,
  TraceDoc,
  VizConfig,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: unknown,
  ) {
    super(`HTTP ${status}`);
  }
}

export interface ReasonRequest {
  question: string;
  method: string;
  provider: string;
  model: string;
  method_params: Record<string, number>;
  generation_params: GenerationParams;
  viz_config: VizConfig;
}

export type MetaReasonRequest = Omit<ReasonRequest, "method">;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, payload);
    }
    return payload as T;
  }

  getMethods(): Promise<MethodInfo[]> {
    return this.request("GET", "/api/methods");
  }

  getProviders(): Promise<ProviderInfo[]> {
    return this.request("GET", "/api/providers");
  }

  reason(body: ReasonRequest): Promise<ReasonResponse> {
    return this.request("POST", "/api/reason", body);
  }

  metaReason(body: MetaReasonRequest): Promise<ReasonResponse> {
    return this.request("POST", "/api/meta-reason", body);
  }

  render(trace: TraceDoc, viz: VizConfig): Promise<RenderResponse> {
    return this.request("POST", "/api/render", { trace, viz_config: viz });
  }
}
