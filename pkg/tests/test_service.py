import urllib.parse

import pytest
from fastapi.testclient import TestClient

from conftest import fixture_text
from ottrkit import ExpansionContext, expand_all, parse_instances
from ottrkit.docgen import load_template_docs
from ottrkit.service import create_app
from ottrkit.workflow import load_workflow

PZ = "http://tpl.ex.org/pizza/Pizza"
AX = "http://tpl.ex.org/owl/axiom/SubClassOf"


@pytest.fixture
def pizza_app(pizza_library, tmp_path):
    docs = load_template_docs(fixture_text("pizza_docs.yaml"), pizza_library)
    app = create_app(pizza_library, "http://mint.ex.org", tmp_path / "sessions", docs=docs)
    return TestClient(app)


@pytest.fixture
def lab_app(materials_library, tmp_path):
    wf = load_workflow(fixture_text("workflow_material.yaml"), materials_library)
    app = create_app(
        materials_library, "http://mint.ex.org", tmp_path / "sessions", workflows=[wf],
    )
    return TestClient(app)


def margherita_payload(mint=()):
    return {
        "template": "pz:Pizza",
        "args": ["<http://ex.org/p/Margherita>", '"Margherita"@en'],
        "mint": list(mint),
    }


class TestTemplates:
    def test_list_templates(self, pizza_app):
        body = pizza_app.get("/api/templates").json()
        assert body == [
            {"iri": AX, "userFacing": False},
            {"iri": PZ, "userFacing": True},
        ]

    def test_schema_with_docs(self, pizza_app):
        encoded = urllib.parse.quote(PZ, safe="")
        body = pizza_app.get(f"/api/templates/{encoded}/schema").json()
        assert body["iri"] == PZ
        assert body["userFacing"] is True
        names = [p["name"] for p in body["parameters"]]
        assert names == ["name", "label"]
        assert body["parameters"][0]["type"] == {"kind": "iri"}
        assert body["parameters"][0]["exampleValue"] == "p:Margherita"
        assert body["parameters"][1]["type"]["kind"] == "literal"

    def test_schema_endpoint_is_total_for_internal_templates(self, pizza_app):
        encoded = urllib.parse.quote(AX, safe="")
        body = pizza_app.get(f"/api/templates/{encoded}/schema").json()
        assert body["userFacing"] is False
        assert [p["name"] for p in body["parameters"]] == ["sub", "super"]

    def test_unknown_template_404(self, pizza_app):
        assert pizza_app.get("/api/templates/http%3A%2F%2Fnope%2FX/schema").status_code == 404


class TestSessions:
    def test_margherita_instance(self, pizza_app):
        session = pizza_app.post("/api/sessions").json()["sessionId"]
        body = pizza_app.post(
            f"/api/sessions/{session}/instances", json=margherita_payload(),
        ).json()
        assert body["instanceIndex"] == 0
        assert body["triplesAdded"] == 3
        assert body["totalTriples"] == 3
        assert body["connectedComponents"] == 1
        assert body["mintedIris"] == []

    def test_duplicate_instance_adds_nothing(self, pizza_app):
        session = pizza_app.post("/api/sessions").json()["sessionId"]
        pizza_app.post(f"/api/sessions/{session}/instances", json=margherita_payload())
        body = pizza_app.post(
            f"/api/sessions/{session}/instances", json=margherita_payload(),
        ).json()
        assert body["triplesAdded"] == 0
        assert body["totalTriples"] == 3

    def test_arity_violation_422(self, pizza_app):
        session = pizza_app.post("/api/sessions").json()["sessionId"]
        response = pizza_app.post(
            f"/api/sessions/{session}/instances",
            json={"template": "pz:Pizza", "args": ["<http://ex.org/p/X>"]},
        )
        assert response.status_code == 422
        diagnostics = response.json()["detail"]["diagnostics"]
        assert diagnostics[0]["code"] == "E_ARITY"

    def test_type_violation_422(self, pizza_app):
        session = pizza_app.post("/api/sessions").json()["sessionId"]
        response = pizza_app.post(
            f"/api/sessions/{session}/instances",
            json={"template": "pz:Pizza", "args": ['"not an iri"', '"Margherita"@en']},
        )
        assert response.status_code == 422
        codes = [d["code"] for d in response.json()["detail"]["diagnostics"]]
        assert "E_TYPE" in codes

    def test_unknown_session_404(self, pizza_app):
        assert pizza_app.post(
            "/api/sessions/deadbeef/instances", json=margherita_payload(),
        ).status_code == 404

    def test_unknown_template_404(self, pizza_app):
        session = pizza_app.post("/api/sessions").json()["sessionId"]
        response = pizza_app.post(
            f"/api/sessions/{session}/instances",
            json={"template": "pz:Ghost", "args": []},
        )
        assert response.status_code == 404

    def test_minting(self, lab_app):
        session = lab_app.post("/api/sessions").json()["sessionId"]
        body = lab_app.post(
            f"/api/sessions/{session}/instances",
            json={
                "template": "lab:Material",
                "args": ["", '"Mg alloy"'],
                "mint": ["sample"],
            },
        ).json()
        assert body["mintedIris"] == [f"http://mint.ex.org/{session}/0"]
        second = lab_app.post(
            f"/api/sessions/{session}/instances",
            json={
                "template": "lab:Material",
                "args": ["", '"Another"'],
                "mint": ["sample"],
            },
        ).json()
        assert second["mintedIris"] == [f"http://mint.ex.org/{session}/1"]

    def test_graph_endpoint_sorted_ntriples(self, pizza_app):
        session = pizza_app.post("/api/sessions").json()["sessionId"]
        pizza_app.post(f"/api/sessions/{session}/instances", json=margherita_payload())
        text = pizza_app.get(f"/api/sessions/{session}/graph?format=ntriples").text
        lines = text.strip().splitlines()
        assert len(lines) == 3
        assert lines == sorted(lines)

    def test_lint_endpoint(self, pizza_app):
        session = pizza_app.post("/api/sessions").json()["sessionId"]
        pizza_app.post(f"/api/sessions/{session}/instances", json=margherita_payload())
        pizza_app.post(f"/api/sessions/{session}/instances", json=margherita_payload())
        report = pizza_app.post(f"/api/sessions/{session}/lint").json()["findings"]
        assert "R_INSTANCE_DUPLICATE" in report
        assert "R_OUTPUT_REDUNDANCY" in report


class TestWorkflowApi:
    def test_workflow_listing(self, lab_app):
        body = lab_app.get("/api/workflows").json()
        assert body[0]["name"] == "material-then-measurement"
        assert [s["id"] for s in body[0]["steps"]] == ["m", "p"]

    def test_advance_through_workflow(self, lab_app):
        session = lab_app.post("/api/sessions").json()["sessionId"]
        first = lab_app.post(
            f"/api/sessions/{session}/workflow/material-then-measurement/advance",
        ).json()
        assert first["nextStep"]["stepId"] == "m"
        assert first["nextStep"]["bindings"]["sample"]["kind"] == "mint"
        assert first["nextStep"]["bindings"]["label"]["kind"] == "input"

        done = lab_app.post(
            f"/api/sessions/{session}/instances",
            json={
                "template": "lab:Material",
                "args": ["", '"Mg alloy"'],
                "mint": ["sample"],
                "workflow": "material-then-measurement",
                "step": "m",
            },
        ).json()
        minted = done["mintedIris"][0]

        second = lab_app.post(
            f"/api/sessions/{session}/workflow/material-then-measurement/advance",
        ).json()
        assert second["nextStep"]["stepId"] == "p"
        assert second["nextStep"]["bindings"]["sample"]["kind"] == "ref"
        assert second["nextStep"]["bindings"]["sample"]["value"] == f"<{minted}>"
        assert second["completed"] == ["m"]

        lab_app.post(
            f"/api/sessions/{session}/instances",
            json={
                "template": "lab:Measurement",
                "args": ["", f"<{minted}>", '"21.5"^^xsd:double'],
                "mint": ["measurement"],
                "workflow": "material-then-measurement",
                "step": "p",
            },
        )
        final = lab_app.post(
            f"/api/sessions/{session}/workflow/material-then-measurement/advance",
        ).json()
        assert final["nextStep"] is None
        assert final["completed"] == ["m", "p"]

    def test_unmet_prerequisites_409(self, lab_app, materials_library, tmp_path):
        session = lab_app.post("/api/sessions").json()["sessionId"]
        # complete step p without m: the next open step is m, so mark p done
        lab_app.post(
            f"/api/sessions/{session}/instances",
            json={
                "template": "lab:Measurement",
                "args": ["", "<http://data.ex.org/material/x>", '"1"^^xsd:double'],
                "mint": ["measurement"],
                "workflow": "material-then-measurement",
                "step": "p",
            },
        )
        # advance proposes m (not completed); completing p created no m values
        body = lab_app.post(
            f"/api/sessions/{session}/workflow/material-then-measurement/advance",
        )
        assert body.status_code == 200
        assert body.json()["nextStep"]["stepId"] == "m"

    def test_unknown_workflow_404(self, lab_app):
        session = lab_app.post("/api/sessions").json()["sessionId"]
        assert lab_app.post(
            f"/api/sessions/{session}/workflow/ghost/advance",
        ).status_code == 404


class TestPersistence:
    def test_replay_reproduces_graph_and_mints(self, materials_library, tmp_path):
        store_dir = tmp_path / "sessions"
        app = TestClient(create_app(materials_library, "http://mint.ex.org", store_dir))
        session = app.post("/api/sessions").json()["sessionId"]
        for i in range(5):
            response = app.post(
                f"/api/sessions/{session}/instances",
                json={
                    "template": "lab:Material",
                    "args": ["", f'"Sample {i}"'],
                    "mint": ["sample"],
                },
            )
            assert response.status_code == 200
        graph_before = app.get(f"/api/sessions/{session}/graph").text
        info_before = app.get(f"/api/sessions/{session}").json()

        # restart: a fresh app over the same directory replays the log
        restarted = TestClient(create_app(materials_library, "http://mint.ex.org", store_dir))
        graph_after = restarted.get(f"/api/sessions/{session}/graph").text
        info_after = restarted.get(f"/api/sessions/{session}").json()

        assert graph_after == graph_before
        assert info_after["mintedIris"] == info_before["mintedIris"]
        assert info_after["totalTriples"] == info_before["totalTriples"]

        # the mint counter continues where the original left off
        next_mint = restarted.post(
            f"/api/sessions/{session}/instances",
            json={"template": "lab:Material", "args": ["", '"More"'], "mint": ["sample"]},
        ).json()["mintedIris"][0]
        assert next_mint == f"http://mint.ex.org/{session}/5"

    def test_session_graph_matches_reexpansion(self, materials_library, tmp_path):
        store_dir = tmp_path / "sessions"
        app = TestClient(create_app(materials_library, "http://mint.ex.org", store_dir))
        session = app.post("/api/sessions").json()["sessionId"]
        for i in range(3):
            app.post(
                f"/api/sessions/{session}/instances",
                json={"template": "lab:Material", "args": ["", f'"S{i}"'], "mint": ["sample"]},
            )
        log_text = (store_dir / f"{session}.log").read_text()
        instances = parse_instances(log_text, materials_library)
        expected = expand_all(instances, ExpansionContext(materials_library)).to_ntriples()
        assert app.get(f"/api/sessions/{session}/graph").text == expected

    def test_workflow_state_survives_restart(self, materials_library, tmp_path):
        store_dir = tmp_path / "sessions"
        wf = load_workflow(fixture_text("workflow_material.yaml"), materials_library)
        app = TestClient(create_app(
            materials_library, "http://mint.ex.org", store_dir, workflows=[wf],
        ))
        session = app.post("/api/sessions").json()["sessionId"]
        app.post(
            f"/api/sessions/{session}/instances",
            json={
                "template": "lab:Material",
                "args": ["", '"Mg"'],
                "mint": ["sample"],
                "workflow": "material-then-measurement",
                "step": "m",
            },
        )
        restarted = TestClient(create_app(
            materials_library, "http://mint.ex.org", store_dir, workflows=[wf],
        ))
        body = restarted.post(
            f"/api/sessions/{session}/workflow/material-then-measurement/advance",
        ).json()
        assert body["nextStep"]["stepId"] == "p"
        assert body["completed"] == ["m"]
