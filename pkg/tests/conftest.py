import pytest

from reasongraph.model import (
    NodeKind,
    ReasoningMethod,
    ReasoningTrace,
    TraceEdge,
    TraceNode,
)


def build_trace(method, nodes, edges, selected_path=None):
    """Compact trace builder: nodes are (id, kind, label[, extras]) tuples,
    edges are (source, target) pairs."""
    built = []
    for spec in nodes:
        node_id, kind, label, *rest = spec
        extras = rest[0] if rest else {}
        built.append(TraceNode(node_id, kind, label, **extras))
    trace = ReasoningTrace(method, built, [TraceEdge(a, b) for a, b in edges])
    if selected_path is not None:
        trace = trace.with_selected_path(selected_path)
    return trace


@pytest.fixture
def beam_example():
    """The two-level beam where greedy-by-level picks the wrong path:
    A(0.9)->C(0.2) totals 1.1 while B(0.5)->D(0.7) totals 1.2."""
    return build_trace(
        ReasoningMethod.BEAM_SEARCH,
        [
            ("q", NodeKind.QUESTION, "Q", {"level": 0}),
            ("a", NodeKind.CANDIDATE, "A", {"score": 0.9, "level": 1}),
            ("b", NodeKind.CANDIDATE, "B", {"score": 0.5, "level": 1}),
            ("c", NodeKind.CANDIDATE, "C", {"score": 0.2, "level": 2}),
            ("d", NodeKind.CANDIDATE, "D", {"score": 0.7, "level": 2}),
            ("f", NodeKind.FINAL_ANSWER, "F", {"level": 3}),
        ],
        [("q", "a"), ("q", "b"), ("a", "c"), ("b", "d"), ("c", "f"), ("d", "f")],
    )
