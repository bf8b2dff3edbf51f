"""Assembly of raw tagged model output into validated reasoning traces.

extract_elements pulls grammar tags out of arbitrary text; assemble_trace
turns them into the method's canonical graph shape; parse composes both
and runs the model validators. parse is total: for any input it either
returns a trace (possibly carrying diagnostics) or raises NoElementsError,
never anything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tagscan
from .errors import NoElementsError
from .grammars import grammar_for
from .model import (
    Diagnostic,
    NodeKind,
    ReasoningMethod,
    ReasoningTrace,
    TraceEdge,
    TraceNode,
    TREE_METHODS,
    canonical_label,
    error,
    validate_trace,
    warning,
)
from .tagscan import Element

NO_FINAL_LABEL = "(no final answer)"
DEFAULT_QUESTION_LABEL = "(question)"


@dataclass(frozen=True)
class RawModelOutput:
    """A provider response to parse: never assumed well-formed."""

    text: str
    method: ReasoningMethod
    question: str = ""


def extract_elements(raw: RawModelOutput) -> tuple[list[Element], list[Diagnostic]]:
    """Scan for the method's grammar tags only; all other text is prose."""
    grammar = grammar_for(raw.method)
    return tagscan.scan(raw.text, grammar.tag_names)


@dataclass
class _NodeDraft:
    id: str
    kind: NodeKind
    label: str
    score: float | None = None
    level: int | None = None
    chain_index: int | None = None


@dataclass
class _Builder:
    diags: list[Diagnostic] = field(default_factory=list)
    nodes: list[_NodeDraft] = field(default_factory=list)
    edges: list[tuple[str, str]] = field(default_factory=list)
    selected_path: list[str] | None = None

    def add_node(self, kind: NodeKind, label: str, **kw) -> _NodeDraft:
        draft = _NodeDraft(id=f"n{len(self.nodes)}", kind=kind, label=label, **kw)
        self.nodes.append(draft)
        return draft

    def add_edge(self, source: str, target: str) -> None:
        self.edges.append((source, target))

    def warn(self, code: str, message: str, **kw) -> None:
        self.diags.append(warning(code, message, **kw))

    def build(self, method: ReasoningMethod) -> ReasoningTrace:
        nodes = tuple(
            TraceNode(d.id, d.kind, d.label, d.score, d.level, d.chain_index) for d in self.nodes
        )
        edges = tuple(TraceEdge(s, t) for s, t in self.edges)
        trace = ReasoningTrace(method, nodes, edges)
        if self.selected_path:
            trace = trace.with_selected_path(self.selected_path)
        return trace


def _warn_nested(b: _Builder, el: Element) -> None:
    for child in el.children:
        b.warn(
            "misplaced_tag",
            f"<{child.name}> is not allowed inside <{el.name}>; ignored",
            span=child.span,
        )
        _warn_nested(b, child)


def _score_from(b: _Builder, el: Element) -> float | None:
    raw_value = el.attrs.get("score")
    if raw_value is None or not raw_value.strip():
        # a missing-but-required score surfaces through trace validation
        return None
    try:
        score = float(raw_value)
    except ValueError:
        b.warn("invalid_score", f"score {raw_value!r} is not a number; dropped", span=el.span)
        return None
    if not 0.0 <= score <= 1.0:
        clamped = min(1.0, max(0.0, score))
        b.warn("score_clamped", f"score {score} clamped to {clamped}", span=el.span)
        return clamped
    return score


def _first_final(b: _Builder, elements: list[Element]) -> str | None:
    """Label of the first non-empty <final_answer>; extras draw a warning."""
    label = None
    for el in elements:
        if el.name != "final_answer":
            continue
        _warn_nested(b, el)
        text = canonical_label(el.text)
        if label is not None:
            b.warn("duplicate_tag", "extra <final_answer> ignored", span=el.span)
            continue
        if not text:
            b.warn("empty_element", "<final_answer> is empty; ignored", span=el.span)
            continue
        label = text
    return label


def _finish_final(b: _Builder, label: str | None, level: int | None = None) -> _NodeDraft:
    if label is None:
        b.warn("missing_final_answer", "no usable <final_answer>; synthesized one")
        label = NO_FINAL_LABEL
    return b.add_node(NodeKind.FINAL_ANSWER, label, level=level)


def _assemble_sequential(b: _Builder, elements: list[Element], raw: RawModelOutput) -> None:
    grammar = grammar_for(raw.method)
    question = b.add_node(NodeKind.QUESTION, canonical_label(raw.question) or DEFAULT_QUESTION_LABEL)
    tail = question.id
    for el in elements:
        if el.name == "final_answer":
            continue
        _warn_nested(b, el)
        spec = grammar.spec_for(el.name)
        if spec is None or spec.kind is None or spec.parent is not None:
            b.warn("misplaced_tag", f"<{el.name}> is not usable here; ignored", span=el.span)
            continue
        label = canonical_label(el.text)
        if not label:
            b.warn("empty_element", f"<{el.name}> is empty; ignored", span=el.span)
            continue
        node = b.add_node(spec.kind, label)
        b.add_edge(tail, node.id)
        tail = node.id
    final = _finish_final(b, _first_final(b, elements))
    b.add_edge(tail, final.id)


def _assemble_self_consistency(b: _Builder, elements: list[Element], raw: RawModelOutput) -> None:
    question = b.add_node(NodeKind.QUESTION, canonical_label(raw.question) or DEFAULT_QUESTION_LABEL)
    chain_tails: list[str] = []
    ordinal = 0
    for el in elements:
        if el.name == "final_answer":
            continue
        if el.name != "chain":
            b.warn("misplaced_tag", f"<{el.name}> outside <chain>; ignored", span=el.span)
            _warn_nested(b, el)
            continue
        chain_index = ordinal
        raw_index = el.attrs.get("index")
        if raw_index is None:
            b.warn("missing_attribute", "chain has no index attribute; numbered by position", span=el.span)
        else:
            try:
                parsed = int(raw_index)
            except ValueError:
                parsed = -1
            if parsed < 0:
                b.warn("invalid_attribute", f"chain index {raw_index!r} is not usable; numbered by position", span=el.span)
            else:
                chain_index = parsed
        ordinal += 1

        tail = None
        answer_seen = False
        for child in el.children:
            if child.name not in ("step", "answer"):
                b.warn("misplaced_tag", f"<{child.name}> is not allowed inside <chain>; ignored", span=child.span)
                _warn_nested(b, child)
                continue
            _warn_nested(b, child)
            if child.name == "answer" and answer_seen:
                b.warn("duplicate_tag", "extra <answer> in chain ignored", span=child.span)
                continue
            label = canonical_label(child.text)
            if not label:
                b.warn("empty_element", f"<{child.name}> is empty; ignored", span=child.span)
                continue
            kind = NodeKind.CANDIDATE if child.name == "answer" else NodeKind.STEP
            if child.name == "answer":
                answer_seen = True
            node = b.add_node(kind, label, chain_index=chain_index)
            b.add_edge(tail or question.id, node.id)
            tail = node.id
        if tail is None:
            b.warn("empty_element", "chain has no usable elements; ignored", span=el.span)
            continue
        if not answer_seen:
            b.warn("missing_chain_answer", f"chain {chain_index} has no <answer>", span=el.span)
        chain_tails.append(tail)

    final = _finish_final(b, _first_final(b, elements))
    for tail in chain_tails:
        b.add_edge(tail, final.id)
    if not chain_tails:
        b.add_edge(question.id, final.id)


def _assemble_tree(b: _Builder, elements: list[Element], raw: RawModelOutput) -> None:
    is_beam = raw.method is ReasoningMethod.BEAM_SEARCH
    question = b.add_node(
        NodeKind.QUESTION, canonical_label(raw.question) or DEFAULT_QUESTION_LABEL, level=0
    )

    drafts: list[tuple[Element, _NodeDraft, int | None]] = []
    by_model_id: dict[str, str] = {}
    auto = 0
    for el in elements:
        if el.name != "node":
            if el.name not in ("final_answer", "selected_path"):
                b.warn("misplaced_tag", f"<{el.name}> is not usable here; ignored", span=el.span)
            continue
        _warn_nested(b, el)
        label = canonical_label(el.text)
        if not label:
            b.warn("empty_element", "<node> is empty; ignored", span=el.span)
            continue
        model_id = (el.attrs.get("id") or "").strip()
        if not model_id:
            auto += 1
            model_id = f"_unnamed{auto}"
            b.warn("missing_attribute", "node has no id attribute; one was invented", span=el.span)
        if model_id in by_model_id:
            suffix = 2
            while f"{model_id}_{suffix}" in by_model_id:
                suffix += 1
            renamed = f"{model_id}_{suffix}"
            b.warn(
                "duplicate_node_id",
                f"node id {model_id!r} reused; second occurrence renamed to {renamed!r}",
                span=el.span,
            )
            model_id = renamed

        declared_level: int | None = None
        if is_beam:
            raw_level = el.attrs.get("level")
            if raw_level is None or not raw_level.strip():
                b.warn("missing_attribute", "beam node has no level attribute; computed from the tree", span=el.span)
            else:
                try:
                    declared_level = int(raw_level)
                except ValueError:
                    b.warn("invalid_attribute", f"level {raw_level!r} is not an integer; computed from the tree", span=el.span)
                if declared_level is not None and declared_level < 0:
                    b.warn("invalid_attribute", f"level {raw_level!r} is negative; computed from the tree", span=el.span)
                    declared_level = None

        draft = b.add_node(NodeKind.CANDIDATE, label, score=_score_from(b, el))
        by_model_id[model_id] = draft.id
        drafts.append((el, draft, declared_level))

    trace_ids = {draft.id for _, draft, _ in drafts}
    for el, draft, _ in drafts:
        parent_attr = (el.attrs.get("parent") or "").strip()
        if not parent_attr:
            b.warn("missing_attribute", "node has no parent attribute; attached to the question", span=el.span)
            parent_id = question.id
        elif parent_attr.lower() == "root":
            parent_id = question.id
        else:
            parent_id = by_model_id.get(parent_attr)
            if parent_id is None or parent_id == draft.id:
                if parent_id is None:
                    message = f"parent id {parent_attr!r} refers to no known node; attached to the question"
                else:
                    message = f"node {parent_attr!r} names itself as parent; attached to the question"
                b.diags.append(error("orphan_node", message, span=el.span, subject=draft.id))
                parent_id = question.id
        b.add_edge(parent_id, draft.id)

    # depth from the question along the edges built so far
    children: dict[str, list[str]] = {}
    for s, t in b.edges:
        children.setdefault(s, []).append(t)
    computed: dict[str, int] = {question.id: 0}
    frontier = [question.id]
    while frontier:
        nxt: list[str] = []
        for node_id in frontier:
            for child in children.get(node_id, ()):
                if child not in computed:
                    computed[child] = computed[node_id] + 1
                    nxt.append(child)
        frontier = nxt

    for el, draft, declared_level in drafts:
        depth = computed.get(draft.id)
        if is_beam and declared_level is not None:
            if depth is not None and depth != declared_level:
                b.warn(
                    "level_mismatch",
                    f"node {draft.id} declares level {declared_level} but sits at depth {depth}",
                    span=el.span,
                    subject=draft.id,
                )
            draft.level = declared_level
        else:
            draft.level = depth

    leaves = [d for _, d, _ in drafts if d.id not in children or not children[d.id]]
    final_level = max((d.level for d in leaves if d.level is not None), default=0) + 1
    final = _finish_final(b, _first_final(b, elements), level=final_level)
    for leaf in leaves:
        b.add_edge(leaf.id, final.id)
    if not any(t == final.id for _, t in b.edges):
        b.add_edge(question.id, final.id)

    if is_beam:
        _apply_selected_path(b, elements, by_model_id, question.id, final.id, trace_ids)


def _apply_selected_path(
    b: _Builder,
    elements: list[Element],
    by_model_id: dict[str, str],
    question_id: str,
    final_id: str,
    trace_ids: set[str],
) -> None:
    declared = [el for el in elements if el.name == "selected_path"]
    if not declared:
        return
    for extra in declared[1:]:
        b.warn("duplicate_tag", "extra <selected_path> ignored", span=extra.span)
    el = declared[0]
    tokens = el.text.replace(",", " ").split()
    if not tokens:
        b.warn("empty_element", "<selected_path> is empty; ignored", span=el.span)
        return
    mapped: list[str] = []
    for token in tokens:
        trace_id = by_model_id.get(token)
        if trace_id is None or trace_id not in trace_ids:
            b.warn("unknown_path_id", f"selected_path id {token!r} matches no node; dropped", span=el.span)
            continue
        mapped.append(trace_id)
    if not mapped:
        b.warn("discarded_selected_path", "selected_path has no usable ids; ignored", span=el.span)
        return
    path = [question_id, *mapped, final_id]
    pairs = set(b.edges)
    connected = all((a, c) in pairs for a, c in zip(path, path[1:]))
    if not connected or len(set(path)) != len(path):
        b.warn(
            "discarded_selected_path",
            "selected_path is not a root-to-final edge path; ignored",
            span=el.span,
        )
        return
    b.selected_path = path


def assemble_trace(
    elements: list[Element], raw: RawModelOutput
) -> tuple[ReasoningTrace, list[Diagnostic]]:
    """Build the method's canonical graph from extracted elements.

    Raises NoElementsError when there is nothing to build from, which
    signals a model response that ignored the tag instructions entirely.
    """
    if not elements:
        raise NoElementsError(
            f"no {raw.method.value} grammar elements found in the response"
        )
    b = _Builder()
    if raw.method is ReasoningMethod.SELF_CONSISTENCY:
        _assemble_self_consistency(b, elements, raw)
    elif raw.method in TREE_METHODS:
        _assemble_tree(b, elements, raw)
    else:
        _assemble_sequential(b, elements, raw)
    return b.build(raw.method), b.diags


def parse(raw: RawModelOutput) -> tuple[ReasoningTrace, list[Diagnostic]]:
    """extract + assemble + validate, with all diagnostics merged."""
    elements, scan_diags = extract_elements(raw)
    if not elements:
        raise NoElementsError(
            f"no {raw.method.value} grammar elements found in the response",
            diagnostics=scan_diags,
        )
    trace, assembly_diags = assemble_trace(elements, raw)
    merged = scan_diags + assembly_diags + validate_trace(trace)
    return trace, list(dict.fromkeys(merged))
