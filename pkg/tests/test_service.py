import json

import pytest
from fastapi.testclient import TestClient

from reasongraph.model import ReasoningMethod, trace_to_dict
from reasongraph.providers import (
    MockFailure,
    MockReply,
    MockTimeout,
    ProviderRegistry,
    mock_provider,
    parse_registry,
)
from reasongraph.service import create_app

from conftest import build_trace
from reasongraph.model import NodeKind

COT_TEXT = "<step>add 2 and 2</step><step>get 4</step><final_answer>4</final_answer>"

BEAM_TEXT = (
    '<node id="A" parent="root" level="1" score="0.9">candidate A</node>'
    '<node id="B" parent="root" level="1" score="0.5">candidate B</node>'
    '<node id="C" parent="A" level="2" score="0.2">candidate C</node>'
    '<node id="D" parent="B" level="2" score="0.7">candidate D</node>'
    "<selected_path>A,C</selected_path>"
    "<final_answer>F</final_answer>"
)

SC_TEXT = (
    '<chain index="1"><step>s1</step><answer>4</answer></chain>'
    '<chain index="2"><step>s2</step><answer>4</answer></chain>'
    '<chain index="3"><step>s3</step><answer>5</answer></chain>'
    "<final_answer>4</final_answer>"
)


def client_for(script=None, **kw):
    kw.setdefault("backoff_base", 0.0)
    registry = ProviderRegistry([mock_provider(script, **kw)])
    return TestClient(create_app(registry))


def reason_body(**overrides):
    body = {
        "question": "What is 2+2?",
        "method": "chain_of_thoughts",
        "provider": "mock",
        "model": "mock-model",
    }
    body.update(overrides)
    return body


class TestCatalogEndpoints:
    def test_methods_lists_exactly_six(self):
        response = client_for().get("/api/methods")
        assert response.status_code == 200
        entries = response.json()
        assert len(entries) == 6
        assert {e["method"] for e in entries} == {m.value for m in ReasoningMethod}
        beam = next(e for e in entries if e["method"] == "beam_search")
        assert {p["name"] for p in beam["params"]} == {"beam_width", "max_depth"}
        assert all("display_name" in e for e in entries)

    def test_providers_view(self):
        response = client_for().get("/api/providers")
        assert response.status_code == 200
        assert response.json() == [
            {
                "id": "mock",
                "wire_protocol": "mock",
                "models": ["mock-model"],
                "available": True,
            }
        ]

    def test_provider_availability_tracks_env(self, monkeypatch):
        text = (
            '[[provider]]\nid = "real"\nwire_protocol = "openai_chat_compatible"\n'
            'base_url = "https://example.test/v1"\nauth_env_var = "SVC_TEST_KEY"\n'
            'models = ["m"]\n'
        )
        monkeypatch.setenv("SVC_TEST_KEY", "sk-svc-secret")
        client = TestClient(create_app(parse_registry(text)))
        assert client.get("/api/providers").json()[0]["available"] is True
        assert "sk-svc-secret" not in client.get("/api/providers").text

        monkeypatch.delenv("SVC_TEST_KEY")
        assert client.get("/api/providers").json()[0]["available"] is False


class TestReason:
    def test_success_payload_shape(self):
        response = client_for([MockReply(COT_TEXT)]).post("/api/reason", json=reason_body())
        assert response.status_code == 200
        body = response.json()
        assert set(body) == {
            "raw_output",
            "trace",
            "diagram",
            "diagnostics",
            "analysis",
            "method_used",
            "timing",
        }
        assert body["raw_output"] == COT_TEXT
        assert body["diagnostics"] == []
        assert body["method_used"] == "chain_of_thoughts"
        assert len(body["trace"]["nodes"]) == 4
        assert body["diagram"].startswith("flowchart TD\n")
        assert all(body["timing"][k] >= 0 for k in ("generation_ms", "parse_ms", "emit_ms"))

    def test_unknown_method_is_400(self):
        response = client_for().post("/api/reason", json=reason_body(method="zigzag"))
        assert response.status_code == 400

    def test_schema_violation_is_400(self):
        response = client_for().post("/api/reason", json={"method": "chain_of_thoughts"})
        assert response.status_code == 400
        assert response.json()["error"] == "validation"

    def test_empty_question_is_400(self):
        response = client_for().post("/api/reason", json=reason_body(question="   "))
        assert response.status_code == 400

    def test_unknown_provider_404(self):
        response = client_for().post("/api/reason", json=reason_body(provider="zeta"))
        assert response.status_code == 404
        assert response.json()["error"] == "unknown_provider"

    def test_unknown_model_404(self):
        response = client_for().post("/api/reason", json=reason_body(model="gpt-99"))
        assert response.status_code == 404

    def test_nonconforming_output_is_200_with_diagnostic(self):
        response = client_for([MockReply("no tags here")]).post("/api/reason", json=reason_body())
        assert response.status_code == 200
        body = response.json()
        assert body["raw_output"] == "no tags here"
        assert body["trace"] is None
        assert body["diagram"] == ""
        assert body["diagnostics"][0]["code"] == "no_elements"

    def test_provider_failure_is_502(self):
        client = client_for([MockFailure(500)], max_retries=0)
        response = client.post("/api/reason", json=reason_body())
        assert response.status_code == 502
        assert response.json()["error"] == "provider_error"

    def test_rate_limit_is_502_with_code(self):
        client = client_for([MockFailure(429)], max_retries=0)
        response = client.post("/api/reason", json=reason_body())
        assert response.status_code == 502
        assert response.json()["error"] == "rate_limited"

    def test_timeout_is_504(self):
        client = client_for([MockTimeout()], max_retries=0)
        response = client.post("/api/reason", json=reason_body())
        assert response.status_code == 504

    def test_retry_then_success_through_the_stack(self):
        client = client_for([MockFailure(429), MockFailure(429), MockReply(COT_TEXT)],
                            max_retries=2)
        response = client.post("/api/reason", json=reason_body())
        assert response.status_code == 200
        assert response.json()["diagnostics"] == []

    def test_beam_analysis_and_highlight(self):
        client = client_for([MockReply(BEAM_TEXT)])
        response = client.post("/api/reason", json=reason_body(method="beam_search"))
        body = response.json()
        assert body["analysis"]["kind"] == "path_score"
        assert body["analysis"]["total"] == pytest.approx(1.2)
        # the model declared A,C; the engine highlights the computed optimum
        assert any(d["code"] == "divergent_selection" for d in body["diagnostics"])
        assert " ==> " in body["diagram"]
        labels = {n["id"]: n["label"] for n in body["trace"]["nodes"]}
        assert [labels[i] for i in body["trace"]["selected_path"]] == [
            "What is 2+2?",
            "candidate B",
            "candidate D",
            "F",
        ]

    def test_self_consistency_vote(self):
        client = client_for([MockReply(SC_TEXT)])
        response = client.post("/api/reason", json=reason_body(method="self_consistency"))
        body = response.json()
        assert body["analysis"] == {
            "kind": "majority_vote",
            "winner": "4",
            "counts": {"4": 2, "5": 1},
            "tie": False,
        }

    def test_statelessness(self):
        responses = []
        for _ in range(2):
            client = client_for([MockReply(COT_TEXT)])
            body = client.post("/api/reason", json=reason_body()).json()
            body.pop("timing")
            responses.append(body)
        assert responses[0] == responses[1]


class TestMetaReason:
    def test_two_phase_success(self):
        client = client_for(
            [MockReply("<selected_method>chain_of_thoughts</selected_method>"), MockReply(COT_TEXT)]
        )
        body = {"question": "pick for me", "provider": "mock", "model": "mock-model"}
        response = client.post("/api/meta-reason", json=body)
        assert response.status_code == 200
        assert response.json()["method_used"] == "chain_of_thoughts"
        assert response.json()["diagnostics"] == []

    def test_selection_failure_is_422_with_raw_text(self):
        client = client_for([MockReply("no idea")])
        response = client.post(
            "/api/meta-reason",
            json={"question": "pick", "provider": "mock", "model": "mock-model"},
        )
        assert response.status_code == 422
        body = response.json()
        assert body["error"] == "meta_selection_failed"
        assert body["raw_output"] == "no idea"

    def test_unknown_selection_is_422(self):
        client = client_for([MockReply("<selected_method>vibes</selected_method>")])
        response = client.post(
            "/api/meta-reason",
            json={"question": "pick", "provider": "mock", "model": "mock-model"},
        )
        assert response.status_code == 422

    def test_phase_two_nonconformance_is_200_with_diagnostic(self):
        client = client_for(
            [MockReply("<selected_method>beam_search</selected_method>"), MockReply("garbage")]
        )
        response = client.post(
            "/api/meta-reason",
            json={"question": "pick", "provider": "mock", "model": "mock-model"},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["method_used"] == "beam_search"
        assert body["diagnostics"][0]["code"] == "no_elements"


class TestRender:
    def trace_payload(self):
        client = client_for([MockReply(COT_TEXT)])
        return client.post("/api/reason", json=reason_body()).json()

    def test_rerender_with_direction_change(self):
        first = self.trace_payload()
        client = client_for()
        response = client.post(
            "/api/render",
            json={"trace": first["trace"], "viz_config": {"direction": "left_right"}},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["text"].startswith("flowchart LR\n")
        assert set(body) == {"text", "id_map", "styles"}

    def test_render_matches_reason_diagram(self):
        first = self.trace_payload()
        response = client_for().post("/api/render", json={"trace": first["trace"]})
        assert response.json()["text"] == first["diagram"]

    def test_cyclic_trace_is_400(self):
        trace = build_trace(
            ReasoningMethod.CHAIN_OF_THOUGHTS,
            [("a", NodeKind.QUESTION, "A"), ("b", NodeKind.STEP, "B")],
            [("a", "b"), ("b", "a")],
        )
        response = client_for().post("/api/render", json={"trace": trace_to_dict(trace)})
        assert response.status_code == 400
        assert response.json()["error"] == "invalid_trace"

    def test_wrap_width_below_minimum_is_400(self):
        first = self.trace_payload()
        response = client_for().post(
            "/api/render", json={"trace": first["trace"], "viz_config": {"wrap_width": 4}}
        )
        assert response.status_code == 400

    def test_malformed_trace_document_is_400(self):
        response = client_for().post("/api/render", json={"trace": {"method": "zigzag"}})
        assert response.status_code == 400


class TestLoggingAndRoot:
    def test_requests_logged_as_json(self, caplog):
        import logging

        client = client_for()
        with caplog.at_level(logging.INFO, logger="reasongraph.service"):
            client.get("/api/methods")
        records = [r for r in caplog.records if r.name == "reasongraph.service"]
        assert records
        entry = json.loads(records[-1].message)
        assert entry["method"] == "GET"
        assert entry["route"] == "/api/methods"
        assert entry["status"] == 200
        assert entry["latency_ms"] >= 0

    def test_root_without_static_describes_endpoints(self):
        response = client_for().get("/")
        assert response.status_code == 200
        assert "endpoints" in response.json()

    def test_static_dir_served_at_root(self, tmp_path):
        (tmp_path / "index.html").write_text("<html><body>ui</body></html>")
        registry = ProviderRegistry([mock_provider()])
        client = TestClient(create_app(registry, static_dir=tmp_path))
        response = client.get("/")
        assert response.status_code == 200
        assert "ui" in response.text
