"""Mermaid flowchart emission for reasoning traces.

Targets the flowchart dialect only: one statement per line, UTF-8, \\n line
endings. Output is deterministic byte-for-byte for equal inputs, which the
golden-file tests rely on. Labels are escaped with Mermaid's #-entities
rather than stripped, so node text survives verbatim.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Mapping

from .errors import InvalidConfigError
from .model import Diagnostic, NodeKind, ReasoningTrace, canonical_label, error


@dataclass(frozen=True)
class Theme:
    """Fill colors for the six style slots."""

    question: str = "#90caf9"
    step: str = "#eceff1"
    reflection: str = "#fff59d"
    subquestion: str = "#e3f2fd"
    final: str = "#a5d6a7"
    selected: str = "#1e88e5"


DEFAULT_THEME = Theme()

_SLOT_ORDER = ("question", "step", "reflection", "subquestion", "final", "selected")

_DIRECTIONS = {"top_down": "TD", "left_right": "LR"}


@dataclass(frozen=True)
class VisualizationConfig:
    direction: str = "top_down"
    wrap_width: int = 30
    show_scores: bool = True
    max_label_chars: int = 240
    theme: Theme = DEFAULT_THEME

    def validate(self) -> None:
        if self.direction not in _DIRECTIONS:
            raise InvalidConfigError(f"direction must be one of {sorted(_DIRECTIONS)}")
        if not 8 <= self.wrap_width <= 120:
            raise InvalidConfigError("wrap_width must be between 8 and 120")
        if self.max_label_chars < self.wrap_width:
            raise InvalidConfigError("max_label_chars must be >= wrap_width")


@dataclass(frozen=True)
class DiagramDocument:
    """Emitted flowchart text plus the diagram-id to trace-id map."""

    text: str
    id_map: Mapping[str, str]
    styles: tuple[str, ...]


def escape_label(label: str) -> str:
    """Make text safe inside a double-quoted Mermaid node label.

    Uses Mermaid's #-entity syntax; the replacements introduce no '&', so
    ampersand escaping cannot corrupt entities we emitted ourselves.
    """
    out = (
        label.replace("&", "#amp;")
        .replace('"', "#quot;")
        .replace("<", "#lt;")
        .replace(">", "#gt;")
    )
    out = out.replace("\r\n", "\n").replace("\r", "\n")
    return out.replace("\n", "<br/>")


def _wrap_parts(label: str, wrap_width: int, max_label_chars: int) -> list[str]:
    if len(label) > max_label_chars:
        label = label[:max_label_chars] + "…"
    lines: list[str] = []
    rest = label
    while len(rest) > wrap_width:
        cut = rest.rfind(" ", 0, wrap_width + 1)
        if cut <= 0:
            # a single token longer than the width is hard-split
            lines.append(rest[:wrap_width])
            rest = rest[wrap_width:]
        else:
            lines.append(rest[:cut])
            rest = rest[cut + 1 :]
    lines.append(rest)
    return lines


def wrap_label(label: str, wrap_width: int, max_label_chars: int) -> str:
    """Greedy wrap at the last space at or before wrap_width per line,
    truncating to max_label_chars (with an ellipsis) first. Breaks are
    emitted as <br/>.
    """
    return "<br/>".join(_wrap_parts(label, wrap_width, max_label_chars))


_STADIUM = ('(["', '"])')
_RECT = ('["', '"]')
_ROUNDED = ('("', '")')


def _shape_for(kind: NodeKind) -> tuple[str, str]:
    if kind in (NodeKind.QUESTION, NodeKind.FINAL_ANSWER):
        return _STADIUM
    if kind in (NodeKind.REFLECTION, NodeKind.IMPROVEMENT):
        return _ROUNDED
    return _RECT


def _slot_for(kind: NodeKind, node_id: str, selected: frozenset[str]) -> str:
    if kind is NodeKind.QUESTION:
        return "question"
    if kind is NodeKind.FINAL_ANSWER:
        return "final"
    if node_id in selected:
        return "selected"
    if kind is NodeKind.SUB_QUESTION:
        return "subquestion"
    if kind in (NodeKind.REFLECTION, NodeKind.IMPROVEMENT):
        return "reflection"
    if kind is NodeKind.SUB_ANSWER:
        # intermediate answers share the final-answer green
        return "final"
    return "step"


def _classdef_body(slot: str, theme: Theme) -> str:
    color = getattr(theme, slot)
    if slot == "selected":
        return f"fill:{color},stroke:#333333,color:#ffffff,stroke-width:2px"
    return f"fill:{color},stroke:#333333"


def emit(trace: ReasoningTrace, config: VisualizationConfig | None = None) -> DiagramDocument:
    """Render a trace as Mermaid flowchart text.

    Every trace node becomes exactly one node statement (diagram ids are
    positional, so arbitrary trace ids stay out of the Mermaid syntax),
    every edge one edge statement, and each used style slot one
    classDef/class pair.
    """
    config = config or VisualizationConfig()
    config.validate()

    lines = [f"flowchart {_DIRECTIONS[config.direction]}"]
    id_map: dict[str, str] = {}
    diagram_id: dict[str, str] = {}
    selected = frozenset(trace.selected_path or ())
    by_slot: dict[str, list[str]] = {}

    for i, node in enumerate(trace.nodes):
        did = f"n{i}"
        id_map[did] = node.id
        diagram_id[node.id] = did
        display = canonical_label(node.label)
        if config.show_scores and node.score is not None:
            display = f"{display} (score: {node.score:.2f})"
        parts = _wrap_parts(display, config.wrap_width, config.max_label_chars)
        label = "<br/>".join(escape_label(part) for part in parts)
        open_bracket, close_bracket = _shape_for(node.kind)
        lines.append(f"    {did}{open_bracket}{label}{close_bracket}")
        by_slot.setdefault(_slot_for(node.kind, node.id, selected), []).append(did)

    for edge in trace.edges:
        src = diagram_id.get(edge.source)
        dst = diagram_id.get(edge.target)
        if src is None or dst is None:
            continue
        arrow = "==>" if edge.on_selected_path else "-->"
        lines.append(f"    {src} {arrow} {dst}")

    styles: list[str] = []
    for slot in _SLOT_ORDER:
        if slot in by_slot:
            styles.append(f"classDef {slot} {_classdef_body(slot, config.theme)}")
    lines.extend(f"    {s}" for s in styles)
    for slot in _SLOT_ORDER:
        if slot in by_slot:
            lines.append(f"    class {','.join(by_slot[slot])} {slot}")

    return DiagramDocument(text="\n".join(lines) + "\n", id_map=id_map, styles=tuple(styles))


_ID_START = frozenset(string.ascii_letters + "_")
_ID_CHARS = frozenset(string.ascii_letters + string.digits + "_")


def _is_identifier(token: str) -> bool:
    return bool(token) and token[0] in _ID_START and all(c in _ID_CHARS for c in token)


@dataclass
class _DiagramScan:
    nodes: set[str] = field(default_factory=set)
    classdefs: set[str] = field(default_factory=set)
    edge_refs: list[tuple[str, str]] = field(default_factory=list)
    class_refs: list[tuple[list[str], str]] = field(default_factory=list)
    diags: list[Diagnostic] = field(default_factory=list)


def _scan_node_statement(scan: _DiagramScan, stmt: str) -> bool:
    pos = 0
    while pos < len(stmt) and stmt[pos] in _ID_CHARS:
        pos += 1
    node_id, rest = stmt[:pos], stmt[pos:]
    if not _is_identifier(node_id) or not rest:
        return False
    for open_bracket, close_bracket in (_STADIUM, _RECT, _ROUNDED):
        if rest.startswith(open_bracket):
            if not rest.endswith(close_bracket) or len(rest) < len(open_bracket) + len(close_bracket):
                scan.diags.append(error("unbalanced_brackets", f"node statement has mismatched brackets: {stmt}"))
                return True
            label = rest[len(open_bracket) : -len(close_bracket)]
            if '"' in label:
                scan.diags.append(error("malformed_statement", f"unescaped quote inside node label: {stmt}"))
            scan.nodes.add(node_id)
            return True
    if rest[0] in "([":
        scan.diags.append(error("unbalanced_brackets", f"node statement has mismatched brackets: {stmt}"))
        return True
    return False


def validate_diagram(doc: DiagramDocument) -> list[Diagnostic]:
    """Self-check that emitted text stays inside the flowchart subset this
    package documents: header, node statements, edges between declared
    nodes, and class references to declared classDefs."""
    scan = _DiagramScan()
    lines = doc.text.split("\n")
    if not lines or lines[0] not in ("flowchart TD", "flowchart LR"):
        scan.diags.append(error("missing_header", "diagram must start with a flowchart header"))
        body = lines
    else:
        body = lines[1:]

    for line in body:
        stmt = line.strip()
        if not stmt:
            continue
        if stmt.startswith("classDef "):
            fields = stmt.split()
            if len(fields) < 3 or not _is_identifier(fields[1]):
                scan.diags.append(error("malformed_statement", f"bad classDef statement: {stmt}"))
                continue
            scan.classdefs.add(fields[1])
            continue
        if stmt.startswith("class "):
            fields = stmt.split()
            if len(fields) != 3:
                scan.diags.append(error("malformed_statement", f"bad class statement: {stmt}"))
                continue
            scan.class_refs.append((fields[1].split(","), fields[2]))
            continue
        edge_split = None
        for arrow in (" --> ", " ==> "):
            if arrow in stmt:
                edge_split = stmt.split(arrow)
                break
        if edge_split is not None:
            if len(edge_split) != 2 or not all(_is_identifier(t) for t in edge_split):
                scan.diags.append(error("malformed_statement", f"bad edge statement: {stmt}"))
            else:
                scan.edge_refs.append((edge_split[0], edge_split[1]))
            continue
        if not _scan_node_statement(scan, stmt):
            scan.diags.append(error("malformed_statement", f"unrecognized statement: {stmt}"))

    for src, dst in scan.edge_refs:
        for ref in (src, dst):
            if ref not in scan.nodes:
                scan.diags.append(error("undeclared_node", f"edge references undeclared node {ref!r}"))
    for ids, name in scan.class_refs:
        if name not in scan.classdefs:
            scan.diags.append(error("undeclared_class", f"class statement references undeclared classDef {name!r}"))
        for ref in ids:
            if ref not in scan.nodes:
                scan.diags.append(error("undeclared_node", f"class statement references undeclared node {ref!r}"))
    return scan.diags
