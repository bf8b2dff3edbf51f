"""Per-method tag vocabularies, prompt scaffolds, and the meta selector.

Each reasoning method owns a small XML tag vocabulary the model is
instructed to emit, plus structural rules (attributes, occurrence bounds,
allowed parent). The prompt templates live as plain-text resource files
under templates/ so they can be edited without touching code; placeholders
are written {name} and substituted literally, with {question} replaced
last so user text is never re-interpreted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from . import tagscan
from .errors import EmptyQuestionError, InvalidConfigError, NoSelectionFoundError
from .model import NodeKind, ReasoningMethod


@dataclass(frozen=True)
class TagAttr:
    name: str
    required: bool = False


@dataclass(frozen=True)
class TagSpec:
    """One tag in a method's vocabulary.

    kind is the node kind an occurrence produces, or None for structural
    tags (<chain> containers, the beam <selected_path> directive).
    max_occurs of None means unbounded; for tags with a parent, the bound
    applies within each parent.
    """

    name: str
    kind: NodeKind | None = None
    attrs: tuple[TagAttr, ...] = ()
    min_occurs: int = 0
    max_occurs: int | None = None
    parent: str | None = None


@dataclass(frozen=True)
class MethodGrammar:
    method: ReasoningMethod
    tags: tuple[TagSpec, ...]
    prompt_template: str

    @property
    def tag_names(self) -> frozenset[str]:
        return frozenset(t.name for t in self.tags)

    def spec_for(self, name: str) -> TagSpec | None:
        for t in self.tags:
            if t.name == name:
                return t
        return None

    def tag_for_kind(self, kind: NodeKind) -> str | None:
        for t in self.tags:
            if t.kind is kind:
                return t.name
        return None


@dataclass(frozen=True)
class MethodParams:
    """Knobs the prompt scaffolds expose; defaults match the bundled demos."""

    num_chains: int = 3
    beam_width: int = 2
    max_depth: int = 3
    max_refinements: int = 2
    num_subquestions_hint: int | None = None

    def validate(self) -> None:
        for name in ("num_chains", "beam_width", "max_depth", "max_refinements"):
            if getattr(self, name) < 1:
                raise InvalidConfigError(f"{name} must be >= 1")
        if self.num_subquestions_hint is not None and self.num_subquestions_hint < 1:
            raise InvalidConfigError("num_subquestions_hint must be >= 1")
        if self.beam_width * self.max_depth > 64:
            raise InvalidConfigError("beam_width * max_depth must be <= 64")


_FINAL = TagSpec("final_answer", NodeKind.FINAL_ANSWER, min_occurs=1, max_occurs=1)

_TAG_TABLE: dict[ReasoningMethod, tuple[TagSpec, ...]] = {
    ReasoningMethod.CHAIN_OF_THOUGHTS: (
        TagSpec("step", NodeKind.STEP, min_occurs=1),
        _FINAL,
    ),
    ReasoningMethod.SELF_REFINE: (
        TagSpec("attempt", NodeKind.ATTEMPT, min_occurs=1, max_occurs=1),
        TagSpec("reflection", NodeKind.REFLECTION),
        TagSpec("improved", NodeKind.IMPROVEMENT),
        _FINAL,
    ),
    ReasoningMethod.LEAST_TO_MOST: (
        TagSpec("subquestion", NodeKind.SUB_QUESTION, min_occurs=1),
        TagSpec("subanswer", NodeKind.SUB_ANSWER, min_occurs=1),
        _FINAL,
    ),
    ReasoningMethod.SELF_CONSISTENCY: (
        TagSpec("chain", None, attrs=(TagAttr("index", required=True),), min_occurs=1),
        TagSpec("step", NodeKind.STEP, parent="chain"),
        TagSpec("answer", NodeKind.CANDIDATE, parent="chain", max_occurs=1),
        _FINAL,
    ),
    ReasoningMethod.TREE_OF_THOUGHTS: (
        TagSpec(
            "node",
            NodeKind.CANDIDATE,
            attrs=(TagAttr("id", required=True), TagAttr("parent", required=True), TagAttr("score")),
            min_occurs=1,
        ),
        _FINAL,
    ),
    ReasoningMethod.BEAM_SEARCH: (
        TagSpec(
            "node",
            NodeKind.CANDIDATE,
            attrs=(
                TagAttr("id", required=True),
                TagAttr("parent", required=True),
                TagAttr("level", required=True),
                TagAttr("score", required=True),
            ),
            min_occurs=1,
        ),
        TagSpec("selected_path", None, max_occurs=1),
        _FINAL,
    ),
}


def _load_template(name: str) -> str:
    return resources.files("reasongraph.templates").joinpath(f"{name}.txt").read_text("utf-8")


@lru_cache(maxsize=None)
def grammar_for(method: ReasoningMethod) -> MethodGrammar:
    """The static grammar of a method; total over the six variants."""
    return MethodGrammar(
        method=method,
        tags=_TAG_TABLE[method],
        prompt_template=_load_template(method.value),
    )


def _substitute(template: str, values: dict[str, str], question: str) -> str:
    # Parameters first, question last: user text must never be re-scanned
    # for placeholders.
    out = template
    for key, value in values.items():
        out = out.replace("{" + key + "}", value)
    return out.replace("{question}", question)


def build_prompt(method: ReasoningMethod, question: str, params: MethodParams | None = None) -> str:
    """Render the method's prompt scaffold for a question.

    The result names every tag of the method's grammar and carries the
    parameter directives; it is deterministic for fixed inputs.
    """
    question = question.strip()
    if not question:
        raise EmptyQuestionError("question must be non-empty")
    params = params or MethodParams()
    params.validate()
    if params.num_subquestions_hint is not None:
        hint = (
            f"Decompose the question into about {params.num_subquestions_hint} "
            "ordered sub-questions."
        )
    else:
        hint = "Decompose the question into as many ordered sub-questions as it needs."
    values = {
        "num_chains": str(params.num_chains),
        "beam_width": str(params.beam_width),
        "max_depth": str(params.max_depth),
        "max_refinements": str(params.max_refinements),
        "decomposition_hint": hint,
    }
    return _substitute(grammar_for(method).prompt_template, values, question)


def build_meta_prompt(question: str) -> str:
    """Prompt asking the model to pick one of the six method names."""
    question = question.strip()
    if not question:
        raise EmptyQuestionError("question must be non-empty")
    return _substitute(_load_template("meta"), {}, question)


META_TAG = "selected_method"


def parse_meta_selection(raw: str) -> ReasoningMethod:
    """Extract the first <selected_method> element and match its content.

    Matching is case-insensitive and normalizes hyphen/space variants
    ("Beam-Search", "beam search") to the canonical underscore names.
    Raises NoSelectionFoundError when the tag is absent and
    UnknownMethodError when the content matches none of the six.
    """
    elements, _ = tagscan.scan(raw, frozenset({META_TAG}))
    if not elements:
        raise NoSelectionFoundError("no <selected_method> element in response")
    return ReasoningMethod.parse(elements[0].text)
