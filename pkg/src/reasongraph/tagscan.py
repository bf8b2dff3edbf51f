"""Rule-based tag scanner for raw LLM output.

LLM responses are almost never well-formed XML documents: there is no root
element, ampersands are unescaped, stray angle brackets abound. A conforming
XML parser rejects them outright, so this module hand-rolls a left-to-right
scanner instead. It recognizes only a caller-supplied set of tag names;
everything else, including unknown tags, is treated as prose and never
disturbs extraction.

Guarantees relied on elsewhere:
- scanning never raises; malformed input degrades to prose plus warnings
- element spans at one nesting depth are non-overlapping and increasing
- an unclosed known tag is dropped (with its subtree) under a warning
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

from .model import Diagnostic, warning

_NAME_START = frozenset(string.ascii_letters + "_")
_NAME_CHARS = frozenset(string.ascii_letters + string.digits + "_-")

_ENTITIES = (
    ("amp;", "&"),
    ("lt;", "<"),
    ("gt;", ">"),
    ("quot;", '"'),
    ("apos;", "'"),
)


def decode_entities(text: str) -> str:
    """Decode the five standard XML entities; leave everything else verbatim."""
    if "&" not in text:
        return text
    out: list[str] = []
    i = 0
    while True:
        amp = text.find("&", i)
        if amp == -1:
            out.append(text[i:])
            break
        out.append(text[i:amp])
        for entity, char in _ENTITIES:
            if text.startswith(entity, amp + 1):
                out.append(char)
                i = amp + 1 + len(entity)
                break
        else:
            out.append("&")
            i = amp + 1
    return "".join(out)


@dataclass
class Element:
    """One recognized tag occurrence.

    text is the prose between this element's tags with child elements
    removed and entities decoded; span covers the opening '<' through the
    '>' of the closing tag, as offsets into the raw input.
    """

    name: str
    attrs: dict[str, str]
    text: str
    span: tuple[int, int]
    children: list["Element"] = field(default_factory=list)


@dataclass
class _Frame:
    name: str
    attrs: dict[str, str]
    start: int
    open_end: int
    parts: list[str] = field(default_factory=list)
    children: list[Element] = field(default_factory=list)


def _parse_name(text: str, pos: int) -> tuple[str, int] | None:
    if pos >= len(text) or text[pos] not in _NAME_START:
        return None
    end = pos + 1
    while end < len(text) and text[end] in _NAME_CHARS:
        end += 1
    return text[pos:end].lower(), end


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_attrs(text: str, pos: int) -> tuple[dict[str, str], int, bool] | None:
    """Parse attributes up to '>' or '/>'. Returns (attrs, end, self_closing),
    or None when the tag is malformed and should be read as prose.
    Values may be single-quoted, double-quoted, or bare tokens.
    """
    attrs: dict[str, str] = {}
    n = len(text)
    while True:
        pos = _skip_ws(text, pos)
        if pos >= n:
            return None
        if text[pos] == ">":
            return attrs, pos + 1, False
        if text[pos] == "/":
            if text.startswith("/>", pos):
                return attrs, pos + 2, True
            return None
        parsed = _parse_name(text, pos)
        if parsed is None:
            return None
        name, pos = parsed
        pos = _skip_ws(text, pos)
        value = ""
        if pos < n and text[pos] == "=":
            pos = _skip_ws(text, pos + 1)
            if pos >= n:
                return None
            quote = text[pos]
            if quote in ("'", '"'):
                close = text.find(quote, pos + 1)
                if close == -1:
                    return None
                value = text[pos + 1 : close]
                pos = close + 1
            else:
                start = pos
                while pos < n and not text[pos].isspace() and text[pos] not in ">/":
                    pos += 1
                if pos == start:
                    return None
                value = text[start:pos]
        attrs.setdefault(name, decode_entities(value))


def _try_parse_tag(text: str, pos: int, known: frozenset[str]):
    """Attempt to read a tag starting at text[pos] == '<'.

    Returns ('close', name, end) or ('open', name, attrs, end, self_closing),
    or None when this '<' does not begin a tag of a known name.
    """
    i = pos + 1
    if i < len(text) and text[i] == "/":
        parsed = _parse_name(text, i + 1)
        if parsed is None:
            return None
        name, after = parsed
        if name not in known:
            return None
        after = _skip_ws(text, after)
        if after < len(text) and text[after] == ">":
            return ("close", name, after + 1)
        return None
    parsed = _parse_name(text, i)
    if parsed is None:
        return None
    name, after = parsed
    if name not in known:
        return None
    result = _parse_attrs(text, after)
    if result is None:
        return None
    attrs, end, self_closing = result
    return ("open", name, attrs, end, self_closing)


def scan(text: str, known_tags: frozenset[str]) -> tuple[list[Element], list[Diagnostic]]:
    """Extract every well-formed occurrence of the known tags, in order."""
    elements: list[Element] = []
    diags: list[Diagnostic] = []
    stack: list[_Frame] = []

    def emit_text(segment: str) -> None:
        if stack and segment:
            stack[-1].parts.append(segment)

    def attach(element: Element) -> None:
        if stack:
            stack[-1].children.append(element)
        else:
            elements.append(element)

    def drop_unclosed(frame: _Frame) -> None:
        diags.append(
            warning(
                "unclosed_tag",
                f"<{frame.name}> was never closed; element dropped",
                span=(frame.start, frame.open_end),
            )
        )

    i = 0
    n = len(text)
    while i < n:
        lt = text.find("<", i)
        if lt == -1:
            emit_text(text[i:])
            break
        emit_text(text[i:lt])
        parsed = _try_parse_tag(text, lt, known_tags)
        if parsed is None:
            emit_text("<")
            i = lt + 1
            continue
        if parsed[0] == "close":
            _, name, end = parsed
            match = None
            for k in range(len(stack) - 1, -1, -1):
                if stack[k].name == name:
                    match = k
                    break
            if match is None:
                # stray close tag: keep it as prose for inner-text fidelity
                emit_text(text[lt:end])
                i = end
                continue
            while len(stack) - 1 > match:
                drop_unclosed(stack.pop())
            frame = stack.pop()
            attach(
                Element(
                    name=frame.name,
                    attrs=frame.attrs,
                    text=decode_entities("".join(frame.parts)),
                    span=(frame.start, end),
                    children=frame.children,
                )
            )
            i = end
        else:
            _, name, attrs, end, self_closing = parsed
            if self_closing:
                attach(Element(name=name, attrs=attrs, text="", span=(lt, end)))
            else:
                stack.append(_Frame(name=name, attrs=attrs, start=lt, open_end=end))
            i = end

    while stack:
        drop_unclosed(stack.pop())
    return elements, diags
