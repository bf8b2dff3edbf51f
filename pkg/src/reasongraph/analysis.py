"""Method-level analyses over a reasoning trace.

best_beam_path enumerates every root-to-leaf candidate path exhaustively;
the traces this platform renders are capped at width * depth <= 64, so
brute force beats a dynamic program on clarity at no real cost.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import (
    MissingScoreError,
    NoCandidatePathsError,
    NoChainAnswersError,
    ReasonGraphError,
    WrongMethodError,
)
from .model import (
    Diagnostic,
    NodeKind,
    ReasoningMethod,
    ReasoningTrace,
    Severity,
    node_levels,
    warning,
)


@dataclass(frozen=True)
class PathScore:
    """A root-child-to-leaf candidate path and its summed score."""

    path: tuple[str, ...]
    total: float


@dataclass(frozen=True)
class VoteResult:
    winner: str
    counts: Mapping[str, int]
    tie: bool


def best_beam_path(trace: ReasoningTrace) -> tuple[PathScore, list[Diagnostic]]:
    """The root-to-leaf path with the highest total score.

    Ties go to the path whose node-insertion-order sequence is
    lexicographically earliest, which makes the result deterministic.
    When the model declared a <selected_path> that differs from the
    computed optimum, a divergent_selection warning is returned alongside;
    the computed path stays authoritative.
    """
    if trace.method is not ReasoningMethod.BEAM_SEARCH:
        raise WrongMethodError(f"best_beam_path needs a beam_search trace, got {trace.method.value}")
    question = trace.question
    if question is None:
        raise NoCandidatePathsError("trace has no question node")

    candidates = [n for n in trace.nodes if n.kind is NodeKind.CANDIDATE]
    for n in candidates:
        if n.score is None:
            raise MissingScoreError(n.id)
    candidate_ids = {n.id for n in candidates}
    scores = {n.id: n.score for n in candidates}

    order_index = {n.id: i for i, n in enumerate(trace.nodes)}

    def successors(node_id: str) -> list[str]:
        found = [i for i in trace.children_map.get(node_id, ()) if i in candidate_ids]
        return sorted(found, key=order_index.__getitem__)

    roots = successors(question.id)
    if not roots:
        raise NoCandidatePathsError("no candidate nodes grow from the question")

    best: PathScore | None = None

    def walk(node_id: str, path: list[str], total: float) -> None:
        nonlocal best
        # the path-membership guard keeps traversal finite even on traces
        # that failed cycle validation upstream
        children = [c for c in successors(node_id) if c not in path]
        if not children:
            # DFS visits paths in insertion-lexicographic order, so keeping
            # only strictly better totals implements the stated tie-break
            if best is None or total > best.total:
                best = PathScore(tuple(path), total)
            return
        for child in children:
            path.append(child)
            walk(child, path, total + scores[child])
            path.pop()

    for root in roots:
        walk(root, [root], scores[root])

    assert best is not None
    diags: list[Diagnostic] = []
    declared = trace.selected_path
    if declared is not None:
        declared_candidates = tuple(i for i in declared if i in candidate_ids)
        if declared_candidates != best.path:
            diags.append(
                warning(
                    "divergent_selection",
                    "model-selected path differs from the highest-scoring path; "
                    "the computed path is used for highlighting",
                )
            )
    return best, diags


def normalize_answer(text: str) -> str:
    """Lexical normalization for vote comparison: lowercase, trim, collapse
    whitespace, strip one trailing period."""
    collapsed = " ".join(text.lower().split())
    return collapsed.removesuffix(".").strip()


def majority_vote(trace: ReasoningTrace) -> VoteResult:
    """Plurality winner over the normalized chain answers.

    A tie keeps tie=True and resolves to the tied answer owned by the
    smallest chain_index.
    """
    if trace.method is not ReasoningMethod.SELF_CONSISTENCY:
        raise WrongMethodError(f"majority_vote needs a self_consistency trace, got {trace.method.value}")
    answers = [
        n for n in trace.nodes if n.kind is NodeKind.CANDIDATE and n.chain_index is not None
    ]
    if not answers:
        raise NoChainAnswersError("trace has no chain answer nodes")

    counts: Counter[str] = Counter()
    smallest_chain: dict[str, int] = {}
    for n in answers:
        normalized = normalize_answer(n.label)
        counts[normalized] += 1
        if normalized not in smallest_chain or n.chain_index < smallest_chain[normalized]:
            smallest_chain[normalized] = n.chain_index
    top = max(counts.values())
    tied = [a for a, c in counts.items() if c == top]
    winner = min(tied, key=lambda a: smallest_chain[a])
    return VoteResult(winner=winner, counts=dict(counts), tie=len(tied) > 1)


@dataclass(frozen=True)
class TraceStats:
    node_count: int
    edge_count: int
    depth: int
    max_width: int
    level_widths: tuple[int, ...]
    kind_counts: Mapping[str, int]


def analyze_and_highlight(
    trace: ReasoningTrace, diagnostics: list[Diagnostic]
) -> tuple[ReasoningTrace, dict[str, Any] | None]:
    """Run the method's analysis and sync the highlighted path.

    For beam traces the computed best path becomes the selected path; the
    model's own declaration is advisory and divergence lands in the
    diagnostics. Analyses are skipped (with a warning appended) on traces
    that already carry error diagnostics or lack the needed data.
    """
    has_errors = any(d.severity is Severity.ERROR for d in diagnostics)
    if trace.method is ReasoningMethod.BEAM_SEARCH and not has_errors:
        try:
            best, extra = best_beam_path(trace)
        except ReasonGraphError as exc:
            diagnostics.append(warning("analysis_skipped", f"beam analysis skipped: {exc}"))
            return trace, None
        diagnostics.extend(extra)
        question = trace.question
        final = trace.final
        if question is not None and final is not None:
            trace = trace.with_selected_path([question.id, *best.path, final.id])
        return trace, {"kind": "path_score", "path": list(best.path), "total": best.total}
    if trace.method is ReasoningMethod.SELF_CONSISTENCY and not has_errors:
        try:
            vote = majority_vote(trace)
        except ReasonGraphError as exc:
            diagnostics.append(warning("analysis_skipped", f"vote skipped: {exc}"))
            return trace, None
        return trace, {
            "kind": "majority_vote",
            "winner": vote.winner,
            "counts": dict(vote.counts),
            "tie": vote.tie,
        }
    return trace, None


def trace_stats(trace: ReasoningTrace) -> TraceStats:
    """Summary counts for the UI side panel and the CLI report.

    Depth is the longest path length from the question; widths count nodes
    per longest-path level.
    """
    levels = node_levels(trace)
    depth = max(levels.values(), default=0)
    widths = [0] * (depth + 1)
    for level in levels.values():
        widths[level] += 1
    kind_counts = Counter(n.kind.value for n in trace.nodes)
    return TraceStats(
        node_count=len(trace.nodes),
        edge_count=len(trace.edges),
        depth=depth,
        max_width=max(widths, default=0),
        level_widths=tuple(widths),
        kind_counts=dict(kind_counts),
    )
