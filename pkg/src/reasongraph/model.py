"""Canonical reasoning-graph data model.

A ReasoningTrace is the single internal representation every other part of
the package consumes: the parser produces one, the analyses read one, and
the diagram emitter renders one. Traces are immutable after construction
and therefore safe to share across concurrent request handlers.
"""

from __future__ import annotations

import heapq
import json
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

from .errors import CycleError, MalformedTraceError, UnknownMethodError


class ReasoningMethod(str, Enum):
    """The six supported reasoning methods."""

    CHAIN_OF_THOUGHTS = "chain_of_thoughts"
    SELF_REFINE = "self_refine"
    LEAST_TO_MOST = "least_to_most"
    SELF_CONSISTENCY = "self_consistency"
    TREE_OF_THOUGHTS = "tree_of_thoughts"
    BEAM_SEARCH = "beam_search"

    @classmethod
    def parse(cls, name: str) -> "ReasoningMethod":
        """Match a method name, tolerating case and hyphen/space variants.

        Fails closed: anything that does not normalize to one of the six
        canonical names raises UnknownMethodError.
        """
        normalized = "_".join(name.strip().lower().replace("-", " ").split())
        for method in cls:
            if normalized == method.value:
                return method
        raise UnknownMethodError(f"unknown reasoning method {name!r}")


TREE_METHODS = frozenset(
    {ReasoningMethod.TREE_OF_THOUGHTS, ReasoningMethod.BEAM_SEARCH}
)

METHOD_DISPLAY_NAMES: Mapping[ReasoningMethod, str] = {
    ReasoningMethod.CHAIN_OF_THOUGHTS: "Chain of Thoughts",
    ReasoningMethod.SELF_REFINE: "Self-Refine",
    ReasoningMethod.LEAST_TO_MOST: "Least to Most",
    ReasoningMethod.SELF_CONSISTENCY: "Self-Consistency",
    ReasoningMethod.TREE_OF_THOUGHTS: "Tree of Thoughts",
    ReasoningMethod.BEAM_SEARCH: "Beam Search",
}


class NodeKind(str, Enum):
    QUESTION = "question"
    STEP = "step"
    ATTEMPT = "attempt"
    REFLECTION = "reflection"
    IMPROVEMENT = "improvement"
    SUB_QUESTION = "sub_question"
    SUB_ANSWER = "sub_answer"
    CANDIDATE = "candidate"
    FINAL_ANSWER = "final_answer"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """A structured, non-fatal report about a trace or its raw text.

    code is a lowercase snake_case identifier; span, when present, is a
    (start, end) character range into the raw model output; subject names
    the offending node or edge where one exists.
    """

    code: str
    severity: Severity
    message: str
    span: tuple[int, int] | None = None
    subject: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "message": self.message,
            "span": list(self.span) if self.span is not None else None,
            "subject": self.subject,
        }


def error(code: str, message: str, **kw: Any) -> Diagnostic:
    return Diagnostic(code, Severity.ERROR, message, **kw)


def warning(code: str, message: str, **kw: Any) -> Diagnostic:
    return Diagnostic(code, Severity.WARNING, message, **kw)


def canonical_label(text: str) -> str:
    """Trim and collapse internal whitespace runs to single spaces."""
    return " ".join(text.split())


@dataclass(frozen=True)
class TraceNode:
    id: str
    kind: NodeKind
    label: str
    score: float | None = None
    level: int | None = None
    chain_index: int | None = None

    def structural_key(self) -> tuple:
        """Identity of the node for structural trace equality; ids excluded."""
        return (self.kind, self.label, self.score, self.level, self.chain_index)


@dataclass(frozen=True)
class TraceEdge:
    source: str
    target: str
    on_selected_path: bool = False


@dataclass(frozen=True)
class ReasoningTrace:
    method: ReasoningMethod
    nodes: tuple[TraceNode, ...]
    edges: tuple[TraceEdge, ...]
    selected_path: tuple[str, ...] | None = None

    def __init__(
        self,
        method: ReasoningMethod,
        nodes: Sequence[TraceNode] = (),
        edges: Sequence[TraceEdge] = (),
        selected_path: Sequence[str] | None = None,
    ):
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(
            self, "selected_path", tuple(selected_path) if selected_path is not None else None
        )

    @cached_property
    def node_map(self) -> Mapping[str, TraceNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def children_map(self) -> Mapping[str, tuple[str, ...]]:
        children: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            if e.source in children and e.target in self.node_map:
                children[e.source].append(e.target)
        return {k: tuple(v) for k, v in children.items()}

    @property
    def question(self) -> TraceNode | None:
        for n in self.nodes:
            if n.kind is NodeKind.QUESTION:
                return n
        return None

    @property
    def final(self) -> TraceNode | None:
        for n in self.nodes:
            if n.kind is NodeKind.FINAL_ANSWER:
                return n
        return None

    def node(self, node_id: str) -> TraceNode:
        return self.node_map[node_id]

    def with_selected_path(self, path: Sequence[str]) -> "ReasoningTrace":
        """Return a copy whose selected_path is `path`, with edge flags synced."""
        pairs = set(zip(path, path[1:]))
        edges = tuple(
            replace(e, on_selected_path=(e.source, e.target) in pairs) for e in self.edges
        )
        return ReasoningTrace(self.method, self.nodes, edges, tuple(path))


def validate_trace(trace: ReasoningTrace) -> list[Diagnostic]:
    """Check every type invariant; diagnostics are data, not failures.

    Structural breaks (cycles, dangling edges, unreachable nodes, a missing
    or duplicated question) are errors. Data oddities that real model
    outputs produce routinely, such as inconsistent beam branching width or
    score-presence anomalies, are warnings.
    """
    diags: list[Diagnostic] = []
    ids = [n.id for n in trace.nodes]
    id_set = set(ids)
    if len(ids) != len(id_set):
        dupes = sorted({i for i, c in Counter(ids).items() if c > 1})
        for node_id in dupes:
            diags.append(error("duplicate_node_id", f"node id {node_id!r} occurs more than once", subject=node_id))

    questions = [n for n in trace.nodes if n.kind is NodeKind.QUESTION]
    if not questions:
        diags.append(error("missing_question", "trace has no question node"))
    for extra in questions[1:]:
        diags.append(error("multiple_questions", "trace has more than one question node", subject=extra.id))

    for n in trace.nodes:
        if not n.label.strip():
            diags.append(error("empty_label", f"node {n.id!r} has an empty label", subject=n.id))
        if n.score is not None and not 0.0 <= n.score <= 1.0:
            diags.append(error("score_out_of_range", f"node {n.id!r} score {n.score} is outside [0, 1]", subject=n.id))
        if n.score is not None and trace.method not in TREE_METHODS:
            diags.append(warning("unexpected_score", f"node {n.id!r} carries a score but {trace.method.value} nodes are unscored", subject=n.id))
        if n.level is not None and n.level < 0:
            diags.append(error("invalid_level", f"node {n.id!r} has negative level {n.level}", subject=n.id))
        if n.chain_index is not None and n.chain_index < 0:
            diags.append(error("invalid_chain_index", f"node {n.id!r} has negative chain index", subject=n.id))
        if n.chain_index is not None and trace.method is not ReasoningMethod.SELF_CONSISTENCY:
            diags.append(warning("unexpected_chain_index", f"node {n.id!r} carries a chain index but method is {trace.method.value}", subject=n.id))

    if trace.method in TREE_METHODS:
        for n in trace.nodes:
            if n.level is None:
                diags.append(error("missing_level", f"node {n.id!r} has no level but {trace.method.value} is tree-based", subject=n.id))
        if trace.method is ReasoningMethod.BEAM_SEARCH:
            for n in trace.nodes:
                if n.kind is NodeKind.CANDIDATE and n.score is None:
                    diags.append(warning("missing_score", f"beam candidate {n.id!r} has no score", subject=n.id))

    seen_pairs: set[tuple[str, str]] = set()
    valid_edges: list[TraceEdge] = []
    for e in trace.edges:
        subject = f"{e.source}->{e.target}"
        if e.source == e.target:
            diags.append(error("self_loop", f"edge {subject} is a self loop", subject=subject))
            continue
        if e.source not in id_set or e.target not in id_set:
            diags.append(error("unknown_endpoint", f"edge {subject} references a node that does not exist", subject=subject))
            continue
        if (e.source, e.target) in seen_pairs:
            diags.append(error("duplicate_edge", f"edge {subject} occurs more than once", subject=subject))
            continue
        seen_pairs.add((e.source, e.target))
        valid_edges.append(e)

    cyclic = _cycle_members(id_set, valid_edges)
    for node_id in sorted(cyclic):
        diags.append(error("cycle", f"node {node_id!r} participates in a cycle", subject=node_id))

    incoming: dict[str, int] = {i: 0 for i in id_set}
    for e in valid_edges:
        incoming[e.target] += 1
    for q in questions:
        if incoming.get(q.id, 0) > 0:
            diags.append(error("question_has_incoming", f"question node {q.id!r} has incoming edges", subject=q.id))
    for n in trace.nodes:
        if n.kind is NodeKind.FINAL_ANSWER:
            if any(e.source == n.id for e in valid_edges):
                diags.append(error("final_answer_outgoing", f"final answer node {n.id!r} has outgoing edges", subject=n.id))

    if len(questions) == 1 and not cyclic:
        reached = _reachable_from(questions[0].id, valid_edges)
        for n in trace.nodes:
            if n.id not in reached and n.kind is not NodeKind.QUESTION:
                diags.append(error("unreachable", f"node {n.id!r} is not reachable from the question", subject=n.id))

    if trace.method is ReasoningMethod.BEAM_SEARCH:
        diags.extend(_check_branching_width(trace, valid_edges))

    if trace.selected_path is not None:
        diags.extend(_check_selected_path(trace, seen_pairs))

    return diags


def _cycle_members(ids: set[str], edges: Iterable[TraceEdge]) -> set[str]:
    """Node ids left over after Kahn elimination, i.e. every cycle member."""
    outgoing: dict[str, list[str]] = {i: [] for i in ids}
    indegree: dict[str, int] = {i: 0 for i in ids}
    for e in edges:
        outgoing[e.source].append(e.target)
        indegree[e.target] += 1
    ready = [i for i in ids if indegree[i] == 0]
    remaining = set(ids)
    while ready:
        node = ready.pop()
        remaining.discard(node)
        for child in outgoing[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                ready.append(child)
    return remaining


def _reachable_from(start: str, edges: Iterable[TraceEdge]) -> set[str]:
    outgoing: dict[str, list[str]] = {}
    for e in edges:
        outgoing.setdefault(e.source, []).append(e.target)
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for child in outgoing.get(node, ()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return seen


def _check_branching_width(trace: ReasoningTrace, edges: list[TraceEdge]) -> list[Diagnostic]:
    """Beam shape check: every expanding parent of a level spawns the same
    number of children. Pruned parents (zero children) are leaves, not
    violations; real beams stop expanding dropped nodes.
    """
    node_map = trace.node_map
    children_count: dict[str, int] = {}
    for e in edges:
        child = node_map.get(e.target)
        if child is not None and child.kind is NodeKind.CANDIDATE:
            children_count[e.source] = children_count.get(e.source, 0) + 1

    by_level: dict[int, list[int]] = {}
    for n in trace.nodes:
        if n.kind not in (NodeKind.CANDIDATE, NodeKind.QUESTION):
            continue
        count = children_count.get(n.id, 0)
        if count == 0:
            continue
        level = n.level if n.level is not None else 0
        by_level.setdefault(level, []).append(count)

    diags = []
    for level in sorted(by_level):
        counts = by_level[level]
        if len(set(counts)) > 1:
            diags.append(
                warning(
                    "inconsistent_branching",
                    f"parents at level {level} expand to unequal child counts {sorted(set(counts))}",
                )
            )
    return diags


def _check_selected_path(trace: ReasoningTrace, edge_pairs: set[tuple[str, str]]) -> list[Diagnostic]:
    path = trace.selected_path or ()
    node_map = trace.node_map
    bad = error("invalid_selected_path", "selected_path is not a root-to-final edge path")
    if len(path) < 2:
        return [bad]
    if any(i not in node_map for i in path):
        return [bad]
    if node_map[path[0]].kind is not NodeKind.QUESTION:
        return [bad]
    if node_map[path[-1]].kind is not NodeKind.FINAL_ANSWER:
        return [bad]
    if any((a, b) not in edge_pairs for a, b in zip(path, path[1:])):
        return [bad]
    return []


def topological_order(trace: ReasoningTrace) -> list[str]:
    """Node ids with every edge pointing forward; ties broken by the order
    nodes were inserted into the trace, so the result is deterministic.
    """
    order_index = {n.id: i for i, n in enumerate(trace.nodes)}
    indegree = {n.id: 0 for n in trace.nodes}
    outgoing: dict[str, list[str]] = {n.id: [] for n in trace.nodes}
    for e in trace.edges:
        if e.source in indegree and e.target in indegree:
            outgoing[e.source].append(e.target)
            indegree[e.target] += 1

    heap = [(order_index[i], i) for i, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    result: list[str] = []
    while heap:
        _, node = heapq.heappop(heap)
        result.append(node)
        for child in outgoing[node]:
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(heap, (order_index[child], child))
    if len(result) != len(trace.nodes):
        raise CycleError("trace graph contains a cycle; no topological order exists")
    return result


def node_levels(trace: ReasoningTrace) -> dict[str, int]:
    """Longest-path distance from the question node, question = 0.

    Nodes unreachable from the question are absent from the result.
    """
    question = trace.question
    if question is None:
        return {}
    order = topological_order(trace)
    levels: dict[str, int] = {question.id: 0}
    for node_id in order:
        if node_id not in levels:
            continue
        for child in trace.children_map.get(node_id, ()):
            candidate = levels[node_id] + 1
            if candidate > levels.get(child, -1):
                levels[child] = candidate
    return levels


def structurally_equal(a: ReasoningTrace, b: ReasoningTrace) -> bool:
    """Trace equality independent of node id values.

    Compares node multisets (kind, label, score, level, chain_index), edge
    sets keyed by endpoint labels, and the selected path mapped to labels.
    This is the basis of every round-trip test.
    """
    if a.method != b.method:
        return False
    if Counter(n.structural_key() for n in a.nodes) != Counter(n.structural_key() for n in b.nodes):
        return False
    a_labels = {n.id: n.label for n in a.nodes}
    b_labels = {n.id: n.label for n in b.nodes}
    a_edges = {(a_labels[e.source], a_labels[e.target]) for e in a.edges}
    b_edges = {(b_labels[e.source], b_labels[e.target]) for e in b.edges}
    if a_edges != b_edges:
        return False
    a_path = None if a.selected_path is None else tuple(a_labels[i] for i in a.selected_path)
    b_path = None if b.selected_path is None else tuple(b_labels[i] for i in b.selected_path)
    return a_path == b_path


def trace_to_dict(trace: ReasoningTrace) -> dict[str, Any]:
    """Canonical JSON form; field names are part of the documented contract."""
    return {
        "method": trace.method.value,
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind.value,
                "label": n.label,
                "score": n.score,
                "level": n.level,
                "chain_index": n.chain_index,
            }
            for n in trace.nodes
        ],
        "edges": [
            {"from": e.source, "to": e.target, "on_selected_path": e.on_selected_path}
            for e in trace.edges
        ],
        "selected_path": list(trace.selected_path) if trace.selected_path is not None else None,
    }


def trace_to_json(trace: ReasoningTrace, indent: int | None = 2) -> str:
    return json.dumps(trace_to_dict(trace), indent=indent, ensure_ascii=False)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise MalformedTraceError(message)


def trace_from_dict(data: Any) -> ReasoningTrace:
    """Decode the canonical JSON form, checking shapes as it goes."""
    _require(isinstance(data, dict), "trace document must be an object")
    _require(isinstance(data.get("method"), str), "trace.method must be a string")
    try:
        method = ReasoningMethod.parse(data["method"])
    except UnknownMethodError as exc:
        raise MalformedTraceError(str(exc)) from exc

    raw_nodes = data.get("nodes")
    raw_edges = data.get("edges")
    _require(isinstance(raw_nodes, list), "trace.nodes must be a list")
    _require(isinstance(raw_edges, list), "trace.edges must be a list")

    nodes = []
    for i, item in enumerate(raw_nodes):
        _require(isinstance(item, dict), f"nodes[{i}] must be an object")
        _require(isinstance(item.get("id"), str), f"nodes[{i}].id must be a string")
        _require(isinstance(item.get("label"), str), f"nodes[{i}].label must be a string")
        kind_name = item.get("kind")
        try:
            kind = NodeKind(kind_name)
        except ValueError:
            raise MalformedTraceError(f"nodes[{i}].kind {kind_name!r} is not a node kind")
        score = item.get("score")
        level = item.get("level")
        chain_index = item.get("chain_index")
        _require(score is None or isinstance(score, (int, float)), f"nodes[{i}].score must be a number")
        _require(level is None or isinstance(level, int), f"nodes[{i}].level must be an integer")
        _require(chain_index is None or isinstance(chain_index, int), f"nodes[{i}].chain_index must be an integer")
        nodes.append(
            TraceNode(
                id=item["id"],
                kind=kind,
                label=item["label"],
                score=float(score) if score is not None else None,
                level=level,
                chain_index=chain_index,
            )
        )

    edges = []
    for i, item in enumerate(raw_edges):
        _require(isinstance(item, dict), f"edges[{i}] must be an object")
        _require(isinstance(item.get("from"), str), f"edges[{i}].from must be a string")
        _require(isinstance(item.get("to"), str), f"edges[{i}].to must be a string")
        edges.append(
            TraceEdge(
                source=item["from"],
                target=item["to"],
                on_selected_path=bool(item.get("on_selected_path", False)),
            )
        )

    selected = data.get("selected_path")
    if selected is not None:
        _require(
            isinstance(selected, list) and all(isinstance(x, str) for x in selected),
            "trace.selected_path must be a list of node ids",
        )
    return ReasoningTrace(method, nodes, edges, selected)


def trace_from_json(text: str) -> ReasoningTrace:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedTraceError(f"trace document is not valid JSON: {exc}") from exc
    return trace_from_dict(data)
