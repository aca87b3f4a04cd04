import time

import pytest
from fastapi.testclient import TestClient

from conftest import ScriptedAgents, make_services

from translaw.server import ServerConfig, create_app
from translaw.server.app import _parse_provider_keys

MOCK_ROLES = {"Translator": "mock", "Annotator": "mock", "Proofreader": "mock"}


def scripted_client(**config_kwargs):
    agents = ScriptedAgents(
        drafts={"Para one.": "譯文一", "Para two.": "譯文二"},
        annotations={"譯文一": 'ERR: "譯文" | CW | 翻譯 | better term'},
        revisions={"譯文一": "翻譯一"},
    )
    services = make_services(responder=agents)
    app = create_app(ServerConfig(**config_kwargs), services=services)
    return TestClient(app)


def create_body(**overrides):
    body = {
        "role_bindings": dict(MOCK_ROLES),
        "text": "Para one.\n\nPara two.",
    }
    body.update(overrides)
    return body


def wait_for_state(client, job_id, states, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        view = client.get(f"/jobs/{job_id}").json()
        if view["state"] in states:
            return view
        time.sleep(0.01)
    raise AssertionError(f"job never reached {states}, last state {view['state']}")


class TestJobCreation:
    def test_created_pending_with_location(self):
        client = scripted_client()
        response = client.post("/jobs", json=create_body())
        assert response.status_code == 201
        body = response.json()
        assert body["state"] == "Pending"
        assert body["paragraph_count"] == 2
        assert response.headers["location"] == f"/jobs/{body['job_id']}"

    def test_unknown_provider_names_field(self):
        client = scripted_client()
        response = client.post(
            "/jobs", json=create_body(role_bindings={**MOCK_ROLES, "Translator": "ghost"})
        )
        assert response.status_code == 400
        assert any(e["field"] == "role_bindings" for e in response.json()["detail"])

    def test_missing_role_binding(self):
        roles = dict(MOCK_ROLES)
        del roles["Annotator"]
        response = scripted_client().post("/jobs", json=create_body(role_bindings=roles))
        assert response.status_code == 400
        assert any(e["field"] == "role_bindings" for e in response.json()["detail"])

    def test_rounds_over_max_names_field(self):
        response = scripted_client().post("/jobs", json=create_body(rounds=9))
        assert response.status_code == 400
        assert any(e["field"] == "rounds" for e in response.json()["detail"])

    def test_empty_document(self):
        response = scripted_client().post("/jobs", json=create_body(text="\n\n"))
        assert response.status_code == 422

    def test_bad_direction(self):
        response = scripted_client().post(
            "/jobs", json=create_body(direction={"source": "xx-nope", "target": "zh-Hant"})
        )
        assert response.status_code == 400
        assert any(e["field"] == "direction" for e in response.json()["detail"])


class TestJobView:
    def test_fresh_then_complete(self):
        client = scripted_client()
        job_id = client.post("/jobs", json=create_body()).json()["job_id"]
        view = wait_for_state(client, job_id, {"Complete"})
        assert [p["final"] for p in view["paragraphs"]] == ["翻譯一", "譯文二"]
        assert view["usage"]
        assert view["cost"]["total"] == "0.00"

    def test_unknown_id(self):
        assert scripted_client().get("/jobs/nope").status_code == 404

    def test_polling_never_regresses(self):
        client = scripted_client()
        job_id = client.post("/jobs", json=create_body(human_annotation=True)).json()["job_id"]
        order = ["Pending", "Translating", "Annotating", "AwaitingHumanAnnotation",
                 "Proofreading", "Complete", "Failed"]
        seen = []
        wait_for_state(client, job_id, {"AwaitingHumanAnnotation"})
        for _ in range(20):
            seen.append(client.get(f"/jobs/{job_id}").json()["state"])
        client.post(f"/jobs/{job_id}/annotations",
                    json={"paragraph_index": 0, "records": "", "round_complete": True})
        wait_for_state(client, job_id, {"Complete"})
        for _ in range(5):
            seen.append(client.get(f"/jobs/{job_id}").json()["state"])
        indices = [order.index(s) for s in seen]
        assert indices == sorted(indices)

    def test_job_listing(self):
        client = scripted_client()
        client.post("/jobs", json=create_body())
        assert len(client.get("/jobs").json()) == 1


class TestAnnotationEndpoint:
    def waiting_job(self, client):
        job_id = client.post("/jobs", json=create_body(human_annotation=True)).json()["job_id"]
        wait_for_state(client, job_id, {"AwaitingHumanAnnotation"})
        return job_id

    def test_full_flow(self):
        client = scripted_client()
        job_id = self.waiting_job(client)
        response = client.post(
            f"/jobs/{job_id}/annotations",
            json={"paragraph_index": 0, "records": 'ERR: "譯文" | CW | 翻譯 | '},
        )
        assert response.status_code == 200
        assert response.json()["state"] == "AwaitingHumanAnnotation"
        response = client.post(
            f"/jobs/{job_id}/annotations",
            json={"paragraph_index": 1, "records": "", "round_complete": True},
        )
        assert response.status_code == 200
        view = wait_for_state(client, job_id, {"Complete"})
        assert view["paragraphs"][0]["final"] == "翻譯一"

    def test_wrong_state(self):
        client = scripted_client()
        job_id = client.post("/jobs", json=create_body()).json()["job_id"]
        wait_for_state(client, job_id, {"Complete"})
        response = client.post(
            f"/jobs/{job_id}/annotations", json={"paragraph_index": 0, "records": ""}
        )
        assert response.status_code == 409

    def test_unknown_code_cited(self):
        client = scripted_client()
        job_id = self.waiting_job(client)
        response = client.post(
            f"/jobs/{job_id}/annotations",
            json={"paragraph_index": 0, "records": 'ERR: "譯文" | ZZ | |'},
        )
        assert response.status_code == 422
        assert "ZZ" in response.json()["detail"]

    def test_span_error_keeps_waiting(self):
        client = scripted_client()
        job_id = self.waiting_job(client)
        response = client.post(
            f"/jobs/{job_id}/annotations",
            json={"paragraph_index": 0, "records": 'ERR: "ghost" | CW | |'},
        )
        assert response.status_code == 422
        assert client.get(f"/jobs/{job_id}").json()["state"] == "AwaitingHumanAnnotation"


class TestResultEndpoint:
    def test_txt_rendering(self):
        client = scripted_client()
        job_id = client.post("/jobs", json=create_body()).json()["job_id"]
        wait_for_state(client, job_id, {"Complete"})
        response = client.get(f"/jobs/{job_id}/result", params={"format": "txt"})
        assert response.status_code == 200
        assert response.text == "翻譯一\n\n譯文二\n"

    def test_json_result(self):
        client = scripted_client()
        job_id = client.post("/jobs", json=create_body()).json()["job_id"]
        wait_for_state(client, job_id, {"Complete"})
        result = client.get(f"/jobs/{job_id}/result", params={"format": "json"}).json()
        assert result["state"] == "Complete"

    def test_before_completion_conflicts(self):
        client = scripted_client()
        job_id = client.post("/jobs", json=create_body(human_annotation=True)).json()["job_id"]
        wait_for_state(client, job_id, {"AwaitingHumanAnnotation"})
        assert client.get(f"/jobs/{job_id}/result").status_code == 409

    def test_unknown_job(self):
        assert scripted_client().get("/jobs/nope/result").status_code == 404


class TestCatalogEndpoints:
    def test_codes(self):
        codes = scripted_client().get("/codes").json()
        assert len(codes) == 31
        categories = {c["category"] for c in codes}
        assert categories == {"Accuracy", "Grammar", "UsageAndStyle"}

    def test_providers_names_only(self):
        body = scripted_client().get("/providers").json()
        assert "mock" in body["providers"]
        assert all(isinstance(name, str) for name in body["providers"])

    def test_no_secrets_in_any_response(self):
        client = scripted_client()
        response = client.post(
            "/jobs", json=create_body(), headers={"X-Provider-Key": "mock=super-secret"}
        )
        job_id = response.json()["job_id"]
        wait_for_state(client, job_id, {"Complete"})
        for path in (f"/jobs/{job_id}", f"/jobs/{job_id}/result", "/providers"):
            assert "super-secret" not in client.get(path).text


def test_provider_key_header_parsing():
    assert _parse_provider_keys("gpt-4o=sk-abc") == {"gpt-4o": "sk-abc"}
    assert _parse_provider_keys("a=1, b=2") == {"a": "1", "b": "2"}
    assert _parse_provider_keys(None) == {}
    assert _parse_provider_keys("malformed") == {}


def test_server_config_file(tmp_path):
    import json

    path = tmp_path / "server.json"
    path.write_text(json.dumps({
        "host": "0.0.0.0",
        "port": 9000,
        "data_dir": str(tmp_path / "data"),
        "max_rounds": 3,
    }), encoding="utf-8")
    config = ServerConfig.from_file(path)
    assert config.port == 9000
    assert config.max_rounds == 3


class TestGlossaryAndCorpusRefs:
    def test_glossary_ref_wires_into_the_job(self, tmp_path):
        glossary_path = tmp_path / "doj.tsv"
        glossary_path.write_text("Court of Final Appeal\t終審法院\n", encoding="utf-8")
        agents = ScriptedAgents(drafts={"The Court of Final Appeal ruled.": "法庭裁定。"})
        app = create_app(
            ServerConfig(glossaries={"doj": str(glossary_path)}),
            services=make_services(responder=agents),
        )
        client = TestClient(app)
        created = client.post("/jobs", json={
            "role_bindings": dict(MOCK_ROLES),
            "text": "The Court of Final Appeal ruled.",
            "glossary_ref": "doj",
        })
        assert created.status_code == 201
        view = wait_for_state(client, created.json()["job_id"], {"Complete"})
        terminology = [w for w in view["warnings"] if w["kind"] == "terminology"]
        assert len(terminology) == 1  # scripted draft lacks the glossary rendering

    def test_unknown_glossary_ref(self):
        response = scripted_client().post(
            "/jobs", json=create_body(glossary_ref="ghost")
        )
        assert response.status_code == 400
        assert any(e["field"] == "glossary_ref" for e in response.json()["detail"])

    def test_corpus_ref_document(self, tmp_path):
        import json

        corpus_path = tmp_path / "corpus.jsonl"
        rows = [
            {"doc_id": "case-9", "index": 0, "src": "Para one.", "tgt": "舊譯一"},
            {"doc_id": "case-9", "index": 1, "src": "Para two.", "tgt": "舊譯二"},
        ]
        corpus_path.write_text(
            "\n".join(json.dumps(r, ensure_ascii=False) for r in rows), encoding="utf-8"
        )
        client = scripted_client()
        created = client.post("/jobs", json={
            "role_bindings": dict(MOCK_ROLES),
            "corpus_ref": str(corpus_path),
            "doc_id": "case-9",
        })
        assert created.status_code == 201
        view = wait_for_state(client, created.json()["job_id"], {"Complete"})
        assert [p["final"] for p in view["paragraphs"]] == ["翻譯一", "譯文二"]

    def test_missing_document_source(self):
        response = scripted_client().post("/jobs", json={"role_bindings": dict(MOCK_ROLES)})
        assert response.status_code == 400
        assert any(e["field"] == "text" for e in response.json()["detail"])
