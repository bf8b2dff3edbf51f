"""reasongraph: parse tagged LLM reasoning output into canonical graphs
and render them as Mermaid flowcharts, with a provider gateway, REST
service, and CLI on top."""

from .analysis import (
    PathScore,
    TraceStats,
    VoteResult,
    analyze_and_highlight,
    best_beam_path,
    majority_vote,
    trace_stats,
)
from .errors import ReasonGraphError
from .grammars import (
    MethodGrammar,
    MethodParams,
    build_meta_prompt,
    build_prompt,
    grammar_for,
    parse_meta_selection,
)
from .mermaid import (
    DiagramDocument,
    Theme,
    VisualizationConfig,
    emit,
    escape_label,
    validate_diagram,
    wrap_label,
)
from .model import (
    Diagnostic,
    NodeKind,
    ReasoningMethod,
    ReasoningTrace,
    Severity,
    TraceEdge,
    TraceNode,
    structurally_equal,
    topological_order,
    trace_from_dict,
    trace_from_json,
    trace_to_dict,
    trace_to_json,
    validate_trace,
)
from .parsing import RawModelOutput, assemble_trace, extract_elements, parse
from .providers import (
    GenerationRequest,
    GenerationResult,
    MockDelay,
    MockFailure,
    MockReply,
    MockTimeout,
    ProviderProfile,
    ProviderRegistry,
    default_registry,
    generate,
    load_registry,
    mock_provider,
    parse_registry,
)
from .synth import SyntheticSample, make_sample

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "DiagramDocument",
    "GenerationRequest",
    "GenerationResult",
    "MethodGrammar",
    "MethodParams",
    "MockDelay",
    "MockFailure",
    "MockReply",
    "MockTimeout",
    "NodeKind",
    "PathScore",
    "ProviderProfile",
    "ProviderRegistry",
    "RawModelOutput",
    "ReasonGraphError",
    "ReasoningMethod",
    "ReasoningTrace",
    "Severity",
    "SyntheticSample",
    "Theme",
    "TraceEdge",
    "TraceNode",
    "TraceStats",
    "VisualizationConfig",
    "VoteResult",
    "analyze_and_highlight",
    "assemble_trace",
    "best_beam_path",
    "build_meta_prompt",
    "build_prompt",
    "default_registry",
    "emit",
    "escape_label",
    "extract_elements",
    "generate",
    "grammar_for",
    "load_registry",
    "majority_vote",
    "make_sample",
    "mock_provider",
    "parse",
    "parse_meta_selection",
    "parse_registry",
    "structurally_equal",
    "topological_order",
    "trace_from_dict",
    "trace_from_json",
    "trace_stats",
    "trace_to_dict",
    "trace_to_json",
    "validate_diagram",
    "validate_trace",
    "wrap_label",
]
