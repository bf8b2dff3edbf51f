// Payloads of the backend REST API; field names mirror docs/api.md.

export interface TraceNodeDoc {
  id: string;
  kind: string;
  label: string;
  score: number | null;
  level: number | null;
  chain_index: number | null;
}

export interface TraceEdgeDoc {
  from: string;
  to: string;
  on_selected_path: boolean;
}

export interface TraceDoc {
  method: string;
  nodes: TraceNodeDoc[];
  edges: TraceEdgeDoc[];
  selected_path: string[] | null;
}

export interface DiagnosticDoc {
  code: string;
  severity: "error" | "warning";
  message: string;
  span: [number, number] | null;
  subject: string | null;
}

export interface TimingDoc {
  generation_ms: number;
  parse_ms: number;
  emit_ms: number;
}

export interface PathScoreDoc {
  kind: "path_score";
  path: string[];
  total: number;
}

export interface MajorityVoteDoc {
  kind: "majority_vote";
  winner: string;
  counts: Record<string, number>;
  tie: boolean;
}

export type AnalysisDoc = PathScoreDoc | MajorityVoteDoc | null;

export interface ReasonResponse {
  raw_output: string;
  trace: TraceDoc | null;
  diagram: string;
  diagnostics: DiagnosticDoc[];
  analysis: AnalysisDoc;
  method_used: string;
  timing: TimingDoc;
}

export interface MethodParamInfo {
  name: string;
  type: string;
  default: number | null;
  minimum: number;
}

export interface MethodInfo {
  method: string;
  display_name: string;
  params: MethodParamInfo[];
}

export interface ProviderInfo {
  id: string;
  wire_protocol: string;
  models: string[];
  available: boolean;
}

export interface VizConfig {
  direction: "top_down" | "left_right";
  wrap_width: number;
  show_scores: boolean;
  max_label_chars: number;
}

export interface RenderResponse {
  text: string;
  id_map: Record<string, string>;
  styles: string[];
}

export interface GenerationParams {
  temperature: number;
  max_tokens: number;
}

export function defaultViz(): VizConfig {
  return { direction: "top_down", wrap_width: 30, show_scores: true, max_label_chars: 240 };
}

export function defaultGeneration(): GenerationParams {
  return { temperature: 0.7, max_tokens: 2048 };
}
