import random

import pytest
from hypothesis import given, settings, strategies as st

from reasongraph.errors import NoElementsError
from reasongraph.model import (
    NodeKind,
    ReasoningMethod,
    Severity,
    structurally_equal,
    validate_trace,
)
from reasongraph.parsing import RawModelOutput, assemble_trace, extract_elements, parse
from reasongraph.synth import make_sample

METHODS = list(ReasoningMethod)


def raw(text, method=ReasoningMethod.CHAIN_OF_THOUGHTS, question="Q"):
    return RawModelOutput(text, method, question)


def kinds_of(trace):
    return [n.kind for n in trace.nodes]


def edge_pairs(trace):
    labels = {n.id: n.label for n in trace.nodes}
    return {(labels[e.source], labels[e.target]) for e in trace.edges}


class TestExtractElements:
    def test_steps_in_order_with_prose(self):
        elements, diags = extract_elements(
            raw("Sure! <step>add 2 and 2</step> then <step>get 4</step>")
        )
        assert diags == []
        assert [(e.name, e.text) for e in elements] == [
            ("step", "add 2 and 2"),
            ("step", "get 4"),
        ]

    def test_unclosed_tag_dropped_with_warning(self):
        elements, diags = extract_elements(raw("<step>a"))
        assert elements == []
        assert [d.code for d in diags] == ["unclosed_tag"]
        assert diags[0].severity is Severity.WARNING

    def test_attribute_quoting_styles(self):
        elements, diags = extract_elements(
            raw(
                "<node id='a' parent=\"root\" score='0.9'>try x</node>",
                ReasoningMethod.BEAM_SEARCH,
            )
        )
        assert diags == []
        assert len(elements) == 1
        assert elements[0].attrs == {"id": "a", "parent": "root", "score": "0.9"}

    def test_bare_attribute_values(self):
        elements, _ = extract_elements(
            raw("<node id=a parent=root level=1 score=0.5>x</node>", ReasoningMethod.BEAM_SEARCH)
        )
        assert elements[0].attrs["parent"] == "root"
        assert elements[0].attrs["level"] == "1"

    def test_unknown_tags_ignored(self):
        elements, diags = extract_elements(
            raw("<thinking>hm</thinking><step>a</step><b>c</b>")
        )
        assert [e.name for e in elements] == ["step"]
        assert diags == []

    def test_entities_decoded_in_text(self):
        elements, _ = extract_elements(raw("<step>a &amp; b &lt; c &#65;</step>"))
        assert elements[0].text == "a & b < c &#65;"

    def test_nested_chain_elements(self):
        elements, _ = extract_elements(
            raw(
                '<chain index="1"><step>s</step><answer>4</answer></chain>',
                ReasoningMethod.SELF_CONSISTENCY,
            )
        )
        assert [e.name for e in elements] == ["chain"]
        assert [c.name for c in elements[0].children] == ["step", "answer"]

    def test_spans_are_monotone_at_top_level(self):
        rng = random.Random(5)
        for method in METHODS:
            sample = make_sample(method, rng)
            elements, _ = extract_elements(RawModelOutput(sample.text, method))
            spans = [e.span for e in elements]
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert e1 <= s2, "top-level spans must not overlap and must increase"
            for el in elements:
                child_spans = [c.span for c in el.children]
                for (s1, e1), (s2, e2) in zip(child_spans, child_spans[1:]):
                    assert e1 <= s2

    def test_stray_close_tag_is_prose(self):
        elements, diags = extract_elements(raw("</step> before <step>a</step>"))
        assert [e.text for e in elements] == ["a"]
        assert diags == []


class TestAssembleChain:
    def test_cot_chain_shape(self):
        elements, _ = extract_elements(
            raw("<step>a</step><step>b</step><final_answer>c</final_answer>")
        )
        trace, diags = assemble_trace(elements, raw(""))
        assert diags == []
        assert kinds_of(trace) == [
            NodeKind.QUESTION,
            NodeKind.STEP,
            NodeKind.STEP,
            NodeKind.FINAL_ANSWER,
        ]
        assert edge_pairs(trace) == {("Q", "a"), ("a", "b"), ("b", "c")}

    def test_missing_final_synthesized(self):
        text = "<step>a</step>"
        trace, diags = parse(raw(text))
        assert trace.final.label == "(no final answer)"
        assert any(d.code == "missing_final_answer" for d in diags)

    def test_self_refine_shape(self):
        text = (
            "<attempt>first</attempt><reflection>wrong</reflection>"
            "<improved>second</improved><final_answer>done</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.SELF_REFINE, "Q"))
        assert diags == []
        assert kinds_of(trace) == [
            NodeKind.QUESTION,
            NodeKind.ATTEMPT,
            NodeKind.REFLECTION,
            NodeKind.IMPROVEMENT,
            NodeKind.FINAL_ANSWER,
        ]

    def test_least_to_most_shape(self):
        text = (
            "<subquestion>sq1</subquestion><subanswer>sa1</subanswer>"
            "<subquestion>sq2</subquestion><subanswer>sa2</subanswer>"
            "<final_answer>f</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.LEAST_TO_MOST, "Q"))
        assert diags == []
        assert edge_pairs(trace) == {
            ("Q", "sq1"),
            ("sq1", "sa1"),
            ("sa1", "sq2"),
            ("sq2", "sa2"),
            ("sa2", "f"),
        }

    def test_duplicate_final_ignored_with_warning(self):
        text = "<step>a</step><final_answer>x</final_answer><final_answer>y</final_answer>"
        trace, diags = parse(raw(text))
        assert trace.final.label == "x"
        assert any(d.code == "duplicate_tag" for d in diags)


class TestAssembleSelfConsistency:
    def test_fan_out_fan_in(self):
        text = (
            '<chain index="1"><step>s1</step><answer>4</answer></chain>'
            '<chain index="2"><step>s2</step><answer>4</answer></chain>'
            "<final_answer>4</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.SELF_CONSISTENCY, "Q"))
        assert diags == []
        final = trace.final
        into_final = [e for e in trace.edges if e.target == final.id]
        assert len(into_final) == 2
        answers = [n for n in trace.nodes if n.kind is NodeKind.CANDIDATE]
        assert {a.chain_index for a in answers} == {1, 2}

    def test_misplaced_step_outside_chain(self):
        text = '<step>loose</step><chain index="1"><step>s</step><answer>a</answer></chain><final_answer>f</final_answer>'
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.SELF_CONSISTENCY, "Q"))
        assert any(d.code == "misplaced_tag" for d in diags)
        assert "loose" not in {n.label for n in trace.nodes}

    def test_chain_without_answer_warns_but_connects(self):
        text = '<chain index="1"><step>s</step></chain><final_answer>f</final_answer>'
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.SELF_CONSISTENCY, "Q"))
        assert any(d.code == "missing_chain_answer" for d in diags)
        assert ("s", "f") in edge_pairs(trace)

    def test_bad_index_falls_back_to_position(self):
        text = '<chain index="x"><step>s</step><answer>a</answer></chain><final_answer>f</final_answer>'
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.SELF_CONSISTENCY, "Q"))
        assert any(d.code == "invalid_attribute" for d in diags)
        answers = [n for n in trace.nodes if n.kind is NodeKind.CANDIDATE]
        assert answers[0].chain_index == 0


class TestAssembleTree:
    BEAM_TEXT = (
        '<node id="A" parent="root" level="1" score="0.9">candidate A</node>'
        '<node id="B" parent="root" level="1" score="0.5">candidate B</node>'
        '<node id="C" parent="A" level="2" score="0.2">candidate C</node>'
        '<node id="D" parent="B" level="2" score="0.7">candidate D</node>'
        "<selected_path>B,D</selected_path>"
        "<final_answer>F</final_answer>"
    )

    def test_beam_reconstruction_with_selected_path(self):
        trace, diags = parse(RawModelOutput(self.BEAM_TEXT, ReasoningMethod.BEAM_SEARCH, "Q"))
        assert diags == []
        assert validate_trace(trace) == []
        labels = {n.id: n.label for n in trace.nodes}
        assert [labels[i] for i in trace.selected_path] == ["Q", "candidate B", "candidate D", "F"]
        assert edge_pairs(trace) == {
            ("Q", "candidate A"),
            ("Q", "candidate B"),
            ("candidate A", "candidate C"),
            ("candidate B", "candidate D"),
            ("candidate C", "F"),
            ("candidate D", "F"),
        }

    def test_orphan_attaches_to_question_with_error(self):
        text = '<node id="a" parent="ghost" level="1" score="0.5">x</node><final_answer>f</final_answer>'
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.BEAM_SEARCH, "Q"))
        orphans = [d for d in diags if d.code == "orphan_node"]
        assert len(orphans) == 1 and orphans[0].severity is Severity.ERROR
        assert ("Q", "x") in edge_pairs(trace)

    def test_duplicate_node_id_renamed(self):
        text = (
            '<node id="a" parent="root" level="1" score="0.5">first</node>'
            '<node id="a" parent="root" level="1" score="0.5">second</node>'
            '<node id="b" parent="a" level="2" score="0.5">child</node>'
            "<final_answer>f</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.BEAM_SEARCH, "Q"))
        assert any(d.code == "duplicate_node_id" for d in diags)
        # the child resolves against the first occurrence
        assert ("first", "child") in edge_pairs(trace)

    def test_level_attribute_trusted_but_mismatch_diagnosed(self):
        text = (
            '<node id="a" parent="root" level="5" score="0.5">x</node>'
            "<final_answer>f</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.BEAM_SEARCH, "Q"))
        assert any(d.code == "level_mismatch" for d in diags)
        node = next(n for n in trace.nodes if n.label == "x")
        assert node.level == 5

    def test_score_clamped(self):
        text = '<node id="a" parent="root" level="1" score="1.7">x</node><final_answer>f</final_answer>'
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.BEAM_SEARCH, "Q"))
        assert any(d.code == "score_clamped" for d in diags)
        assert next(n for n in trace.nodes if n.label == "x").score == 1.0

    def test_unparseable_score_dropped(self):
        text = '<node id="a" parent="root" level="1" score="high">x</node><final_answer>f</final_answer>'
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.BEAM_SEARCH, "Q"))
        codes = {d.code for d in diags}
        assert "invalid_score" in codes
        assert "missing_score" in codes  # validation notices the hole

    def test_unknown_selected_path_id_dropped(self):
        text = (
            '<node id="a" parent="root" level="1" score="0.5">x</node>'
            "<selected_path>a,zz</selected_path>"
            "<final_answer>f</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.BEAM_SEARCH, "Q"))
        assert any(d.code == "unknown_path_id" for d in diags)
        labels = {n.id: n.label for n in trace.nodes}
        assert [labels[i] for i in trace.selected_path] == ["Q", "x", "f"]

    def test_disconnected_selected_path_discarded(self):
        text = (
            '<node id="a" parent="root" level="1" score="0.5">x</node>'
            '<node id="b" parent="a" level="2" score="0.5">y</node>'
            "<selected_path>b,a</selected_path>"
            "<final_answer>f</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.BEAM_SEARCH, "Q"))
        assert trace.selected_path is None
        assert any(d.code == "discarded_selected_path" for d in diags)

    def test_tree_of_thoughts_levels_computed(self):
        text = (
            '<node id="a" parent="root">root thought</node>'
            '<node id="b" parent="a">deeper</node>'
            "<final_answer>f</final_answer>"
        )
        trace, diags = parse(RawModelOutput(text, ReasoningMethod.TREE_OF_THOUGHTS, "Q"))
        assert diags == []
        by_label = {n.label: n for n in trace.nodes}
        assert by_label["Q"].level == 0
        assert by_label["root thought"].level == 1
        assert by_label["deeper"].level == 2
        assert by_label["f"].level == 3


class TestParseTotality:
    def test_well_formed_has_no_diagnostics(self):
        trace, diags = parse(raw("<step>a</step><final_answer>b</final_answer>"))
        assert diags == []

    def test_prose_only_raises_no_elements(self):
        for method in METHODS:
            with pytest.raises(NoElementsError):
                parse(RawModelOutput("hello world", method))

    def test_no_elements_carries_scanner_warnings(self):
        with pytest.raises(NoElementsError) as exc_info:
            parse(raw("<step>a"))
        assert [d.code for d in exc_info.value.diagnostics] == ["unclosed_tag"]

    @settings(max_examples=300, deadline=None)
    @given(st.binary(max_size=600), st.sampled_from(METHODS))
    def test_never_raises_anything_else(self, blob, method):
        text = blob.decode("utf-8", errors="replace")
        try:
            trace, diags = parse(RawModelOutput(text, method, "Q"))
        except NoElementsError:
            return
        assert trace.question is not None


def inject_prose(text, method, junk_segments):
    """Insert junk between top-level printed elements, using the scanner's
    spans as the boundaries."""
    elements, _ = extract_elements(RawModelOutput(text, method))
    out = []
    cursor = 0
    junk = iter(junk_segments)

    def next_junk():
        try:
            return next(junk)
        except StopIteration:
            return ""

    for el in elements:
        start, end = el.span
        out.append(text[cursor:start])
        out.append(next_junk())
        out.append(text[start:end])
        cursor = end
    out.append(text[cursor:])
    out.append(next_junk())
    return "".join(out)


JUNK = st.lists(
    st.sampled_from(
        [
            " so, ",
            "\nOkay — next:\n",
            "<scratch>ignore me</scratch>",
            "</step>",
            "</chain>",
            "< not a tag",
            "a < b && c > d",
            "&amp; &bogus;",
            "!!!",
        ]
    ),
    max_size=10,
)


class TestRoundTripProperties:
    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10**9), st.sampled_from(METHODS))
    def test_round_trip(self, seed, method):
        sample = make_sample(method, random.Random(seed))
        trace, diags = parse(RawModelOutput(sample.text, method, sample.question))
        assert not [d for d in diags if d.severity is Severity.ERROR]
        assert structurally_equal(sample.trace, trace)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(0, 10**9), st.sampled_from(METHODS), JUNK)
    def test_prose_immunity(self, seed, method, junk):
        sample = make_sample(method, random.Random(seed), prose=False)
        mutated = inject_prose(sample.text, method, junk)
        baseline, _ = parse(RawModelOutput(sample.text, method, sample.question))
        mutated_trace, _ = parse(RawModelOutput(mutated, method, sample.question))
        assert structurally_equal(baseline, mutated_trace)
