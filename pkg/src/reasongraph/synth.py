"""Synthetic trace writer.

Generates random structurally valid traces together with text that prints
them in the exact grammar of their method. Round-trip tests parse the text
back and demand structural equality; the corpus command and the default
mock provider reuse the same generator.

The writer is deliberately independent of the parser: it never calls into
parsing code, it just prints the documented tag grammar.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .model import (
    NodeKind,
    ReasoningMethod,
    ReasoningTrace,
    TraceEdge,
    TraceNode,
    canonical_label,
)

_WORDS = (
    "balance carry check combine compare count deduce derive divide estimate "
    "expand factor group infer join match measure merge note order pair plan "
    "recall reduce refine scale simplify solve sort split substitute sum test "
    "trace verify weigh"
).split()

_SPECIAL_TOKENS = ('a & b', 'x < y', 'y > x', '"quoted"', "it's")

# prose decoys: must never form a valid open tag of any grammar
_DECOYS = (
    "Sure, let me work through it.",
    "<thinking>hmm</thinking>",
    "Note that 5 < 7 here.",
    "a && b holds,",
    "so far so good.",
    "< maybe not>",
    "Checking once more:",
)

_ANSWER_POOL = ("4", "42", "paris", "yes", "no", "blue")


def escape_inner_text(text: str) -> str:
    """Entity-escape text destined for the inside of a tag."""
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


@dataclass(frozen=True)
class SyntheticSample:
    trace: ReasoningTrace
    text: str
    question: str


class _Labels:
    """Unique, canonical label factory."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        words = self.rng.sample(_WORDS, self.rng.randint(2, 4))
        if self.rng.random() < 0.2:
            words.insert(self.rng.randrange(len(words)), self.rng.choice(_SPECIAL_TOKENS))
        return f"{' '.join(words)} {self.counter}"

    def question(self) -> str:
        self.counter += 1
        return f"how to {' '.join(self.rng.sample(_WORDS, 2))} {self.counter}?"


class _SampleBuilder:
    def __init__(self, method: ReasoningMethod, question: str, level0: bool = False):
        self.method = method
        self.question = question
        self.nodes: list[TraceNode] = [
            TraceNode("n0", NodeKind.QUESTION, canonical_label(question), level=0 if level0 else None)
        ]
        self.edges: list[TraceEdge] = []
        self.pieces: list[str] = []

    @property
    def question_id(self) -> str:
        return "n0"

    def add(self, kind: NodeKind, label: str, **kw) -> TraceNode:
        node = TraceNode(f"n{len(self.nodes)}", kind, label, **kw)
        self.nodes.append(node)
        return node

    def edge(self, source: str, target: str) -> None:
        self.edges.append(TraceEdge(source, target))

    def element(self, tag: str, label: str, **attrs) -> None:
        rendered = "".join(f' {k}="{v}"' for k, v in attrs.items())
        self.pieces.append(f"<{tag}{rendered}>{escape_inner_text(label)}</{tag}>")

    def finish(
        self,
        rng: random.Random,
        prose: bool,
        selected_path: list[str] | None = None,
    ) -> SyntheticSample:
        trace = ReasoningTrace(self.method, self.nodes, self.edges)
        if selected_path:
            trace = trace.with_selected_path(selected_path)
        chunks: list[str] = []
        for piece in self.pieces:
            if prose and rng.random() < 0.35:
                chunks.append(rng.choice(_DECOYS))
            chunks.append(piece)
        if prose and rng.random() < 0.35:
            chunks.append(rng.choice(_DECOYS))
        return SyntheticSample(trace=trace, text="\n".join(chunks), question=self.question)


def _round_score(rng: random.Random) -> float:
    # hundredths survive the float -> "%.2f" -> float round trip exactly
    return rng.randint(0, 100) / 100


def _chain_of_thoughts(rng: random.Random, lab: _Labels, prose: bool) -> SyntheticSample:
    b = _SampleBuilder(ReasoningMethod.CHAIN_OF_THOUGHTS, lab.question())
    tail = b.question_id
    for _ in range(rng.randint(1, 6)):
        node = b.add(NodeKind.STEP, lab.fresh())
        b.edge(tail, node.id)
        b.element("step", node.label)
        tail = node.id
    final = b.add(NodeKind.FINAL_ANSWER, lab.fresh())
    b.edge(tail, final.id)
    b.element("final_answer", final.label)
    return b.finish(rng, prose)


def _self_refine(rng: random.Random, lab: _Labels, prose: bool) -> SyntheticSample:
    b = _SampleBuilder(ReasoningMethod.SELF_REFINE, lab.question())
    attempt = b.add(NodeKind.ATTEMPT, lab.fresh())
    b.edge(b.question_id, attempt.id)
    b.element("attempt", attempt.label)
    tail = attempt.id
    for _ in range(rng.randint(0, 3)):
        reflection = b.add(NodeKind.REFLECTION, lab.fresh())
        b.edge(tail, reflection.id)
        b.element("reflection", reflection.label)
        improved = b.add(NodeKind.IMPROVEMENT, lab.fresh())
        b.edge(reflection.id, improved.id)
        b.element("improved", improved.label)
        tail = improved.id
    final = b.add(NodeKind.FINAL_ANSWER, lab.fresh())
    b.edge(tail, final.id)
    b.element("final_answer", final.label)
    return b.finish(rng, prose)


def _least_to_most(rng: random.Random, lab: _Labels, prose: bool) -> SyntheticSample:
    b = _SampleBuilder(ReasoningMethod.LEAST_TO_MOST, lab.question())
    tail = b.question_id
    for _ in range(rng.randint(1, 4)):
        sub_q = b.add(NodeKind.SUB_QUESTION, lab.fresh())
        b.edge(tail, sub_q.id)
        b.element("subquestion", sub_q.label)
        sub_a = b.add(NodeKind.SUB_ANSWER, lab.fresh())
        b.edge(sub_q.id, sub_a.id)
        b.element("subanswer", sub_a.label)
        tail = sub_a.id
    final = b.add(NodeKind.FINAL_ANSWER, lab.fresh())
    b.edge(tail, final.id)
    b.element("final_answer", final.label)
    return b.finish(rng, prose)


def _self_consistency(rng: random.Random, lab: _Labels, prose: bool) -> SyntheticSample:
    b = _SampleBuilder(ReasoningMethod.SELF_CONSISTENCY, lab.question())
    pool = rng.sample(_ANSWER_POOL, 2)
    tails: list[str] = []
    answers: list[str] = []
    for chain_index in range(1, rng.randint(2, 4) + 1):
        lines: list[str] = []
        tail = b.question_id
        for _ in range(rng.randint(1, 3)):
            step = b.add(NodeKind.STEP, lab.fresh(), chain_index=chain_index)
            b.edge(tail, step.id)
            lines.append(f"<step>{escape_inner_text(step.label)}</step>")
            tail = step.id
        answer = b.add(NodeKind.CANDIDATE, rng.choice(pool), chain_index=chain_index)
        b.edge(tail, answer.id)
        lines.append(f"<answer>{escape_inner_text(answer.label)}</answer>")
        tails.append(answer.id)
        answers.append(answer.label)
        body = "\n".join(lines)
        b.pieces.append(f'<chain index="{chain_index}">\n{body}\n</chain>')
    final_label = max(sorted(set(answers)), key=answers.count)
    final = b.add(NodeKind.FINAL_ANSWER, final_label)
    for tail in tails:
        b.edge(tail, final.id)
    b.element("final_answer", final.label)
    return b.finish(rng, prose)


def _model_id(level: int, index: int) -> str:
    return f"{string.ascii_lowercase[level % 26]}{index + 1}"


def _tree_of_thoughts(rng: random.Random, lab: _Labels, prose: bool) -> SyntheticSample:
    b = _SampleBuilder(ReasoningMethod.TREE_OF_THOUGHTS, lab.question(), level0=True)
    with_scores = rng.random() < 0.5
    model_ids: dict[str, str] = {}

    def attach(parent_trace_id: str, parent_model: str, level: int, index: int) -> TraceNode:
        score = _round_score(rng) if with_scores else None
        node = b.add(NodeKind.CANDIDATE, lab.fresh(), score=score, level=level)
        model = _model_id(level - 1, index)
        model_ids[node.id] = model
        b.edge(parent_trace_id, node.id)
        attrs = {"id": model, "parent": parent_model}
        if score is not None:
            attrs["score"] = f"{score:.2f}"
        b.element("node", node.label, **attrs)
        return node

    frontier: list[TraceNode] = []
    for i in range(rng.randint(1, 3)):
        frontier.append(attach(b.question_id, "root", 1, i))
    total = len(frontier)
    depth = rng.randint(1, 3)
    for level in range(2, depth + 1):
        nxt: list[TraceNode] = []
        index = 0
        for parent in frontier:
            for _ in range(rng.randint(0, 3)):
                if total >= 12:
                    break
                nxt.append(attach(parent.id, model_ids[parent.id], level, index))
                index += 1
                total += 1
        if not nxt:
            break
        frontier = nxt

    leaves = [n for n in b.nodes if n.kind is NodeKind.CANDIDATE and not any(e.source == n.id for e in b.edges)]
    final_level = max(n.level for n in leaves) + 1
    final = b.add(NodeKind.FINAL_ANSWER, lab.fresh(), level=final_level)
    for leaf in leaves:
        b.edge(leaf.id, final.id)
    b.element("final_answer", final.label)
    return b.finish(rng, prose)


def _beam_search(rng: random.Random, lab: _Labels, prose: bool, max_depth: int = 3, max_width: int = 4) -> SyntheticSample:
    b = _SampleBuilder(ReasoningMethod.BEAM_SEARCH, lab.question(), level0=True)
    model_ids: dict[str, str] = {}

    def attach(parent_trace_id: str, parent_model: str, level: int, index: int) -> TraceNode:
        score = _round_score(rng)
        node = b.add(NodeKind.CANDIDATE, lab.fresh(), score=score, level=level)
        model = _model_id(level - 1, index)
        model_ids[node.id] = model
        b.edge(parent_trace_id, node.id)
        b.element(
            "node", node.label,
            id=model, parent=parent_model, level=str(level), score=f"{score:.2f}",
        )
        return node

    frontier = [
        attach(b.question_id, "root", 1, i) for i in range(rng.randint(1, max_width))
    ]
    depth = rng.randint(1, max_depth)
    for level in range(2, depth + 1):
        # every expanding parent gets the same child count; some parents
        # are pruned entirely, which keeps the level width consistent
        per_parent = rng.randint(1, min(3, max_width))
        kept = [n for n in frontier if rng.random() < 0.7] or [frontier[0]]
        kept = kept[: max(1, max_width // per_parent)]
        nxt: list[TraceNode] = []
        index = 0
        for parent in kept:
            for _ in range(per_parent):
                nxt.append(attach(parent.id, model_ids[parent.id], level, index))
                index += 1
        frontier = nxt

    leaves = [n for n in b.nodes if n.kind is NodeKind.CANDIDATE and not any(e.source == n.id for e in b.edges)]
    final_level = max(n.level for n in leaves) + 1
    final = b.add(NodeKind.FINAL_ANSWER, lab.fresh(), level=final_level)
    for leaf in leaves:
        b.edge(leaf.id, final.id)

    selected: list[str] | None = None
    if rng.random() < 0.8:
        children: dict[str, list[str]] = {}
        for e in b.edges:
            children.setdefault(e.source, []).append(e.target)
        walk = rng.choice(children[b.question_id])
        chosen = [walk]
        while True:
            nexts = [c for c in children.get(walk, ()) if c != final.id]
            if not nexts:
                break
            walk = rng.choice(nexts)
            chosen.append(walk)
        b.pieces.append(
            "<selected_path>" + ",".join(model_ids[i] for i in chosen) + "</selected_path>"
        )
        selected = [b.question_id, *chosen, final.id]

    b.element("final_answer", final.label)
    return b.finish(rng, prose, selected_path=selected)


_GENERATORS = {
    ReasoningMethod.CHAIN_OF_THOUGHTS: _chain_of_thoughts,
    ReasoningMethod.SELF_REFINE: _self_refine,
    ReasoningMethod.LEAST_TO_MOST: _least_to_most,
    ReasoningMethod.SELF_CONSISTENCY: _self_consistency,
    ReasoningMethod.TREE_OF_THOUGHTS: _tree_of_thoughts,
    ReasoningMethod.BEAM_SEARCH: _beam_search,
}


def make_sample(method: ReasoningMethod, rng: random.Random, prose: bool = True) -> SyntheticSample:
    """One random well-formed sample: a trace plus text that prints it."""
    return _GENERATORS[method](rng, _Labels(rng), prose)


def golden_samples():
    """Three fixed trace/config pairs behind the byte-for-byte golden files
    in docs/diagram-format."""
    from .mermaid import VisualizationConfig

    cot = ReasoningTrace(
        ReasoningMethod.CHAIN_OF_THOUGHTS,
        [
            TraceNode("n0", NodeKind.QUESTION, "What is 7 times 8?"),
            TraceNode("n1", NodeKind.STEP, "Recall the times table for 7"),
            TraceNode("n2", NodeKind.STEP, "7 times 8 equals 56"),
            TraceNode("n3", NodeKind.FINAL_ANSWER, "56"),
        ],
        [TraceEdge("n0", "n1"), TraceEdge("n1", "n2"), TraceEdge("n2", "n3")],
    )

    refine = ReasoningTrace(
        ReasoningMethod.SELF_REFINE,
        [
            TraceNode("n0", NodeKind.QUESTION, 'Write a one-line summary of "graph search"'),
            TraceNode("n1", NodeKind.ATTEMPT, "Graph search explores nodes"),
            TraceNode("n2", NodeKind.REFLECTION, "Too vague, say how exploration is ordered"),
            TraceNode("n3", NodeKind.IMPROVEMENT, "Graph search explores nodes in a frontier order such as BFS or DFS"),
            TraceNode("n4", NodeKind.FINAL_ANSWER, "Graph search visits nodes in a frontier order (BFS, DFS) until a goal is found"),
        ],
        [TraceEdge("n0", "n1"), TraceEdge("n1", "n2"), TraceEdge("n2", "n3"), TraceEdge("n3", "n4")],
    )

    beam = ReasoningTrace(
        ReasoningMethod.BEAM_SEARCH,
        [
            TraceNode("n0", NodeKind.QUESTION, "Pick the fastest route through town", level=0),
            TraceNode("n1", NodeKind.CANDIDATE, "Take the ring road", score=0.9, level=1),
            TraceNode("n2", NodeKind.CANDIDATE, "Cut through the center", score=0.5, level=1),
            TraceNode("n3", NodeKind.CANDIDATE, "Ring road, then north bridge", score=0.2, level=2),
            TraceNode("n4", NodeKind.CANDIDATE, "Center, then river tunnel", score=0.7, level=2),
            TraceNode("n5", NodeKind.FINAL_ANSWER, "Cut through the center and use the river tunnel", level=3),
        ],
        [
            TraceEdge("n0", "n1"),
            TraceEdge("n0", "n2"),
            TraceEdge("n1", "n3"),
            TraceEdge("n2", "n4"),
            TraceEdge("n3", "n5"),
            TraceEdge("n4", "n5"),
        ],
    ).with_selected_path(["n0", "n2", "n4", "n5"])

    return [
        ("golden-chain", cot, VisualizationConfig()),
        ("golden-refine", refine, VisualizationConfig(direction="left_right")),
        ("golden-beam", beam, VisualizationConfig(wrap_width=20)),
    ]
