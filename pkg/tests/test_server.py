import json
import threading
import time
from pathlib import Path

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from flowercase.cli import cli
from flowercase.server import create_app

T = [f"2019-02-0{i}T0{i}:00:00Z" for i in range(1, 10)]


@pytest.fixture
def root(tmp_path):
    return tmp_path / "cases"


@pytest.fixture
def client(root):
    return TestClient(create_app(root))


def new_case(client, name="demo"):
    response = client.post("/cases", json={"name": name, "opened_at": T[0]})
    assert response.status_code == 201
    return response.json()["case_id"]


class TestCaseEndpoints:
    def test_create_returns_201_and_seq(self, client):
        response = client.post("/cases", json={"name": "demo", "opened_at": T[0]})
        assert response.status_code == 201
        body = response.json()
        assert len(body["case_id"]) == 26 and body["seq"] == 1

    def test_get_case_payload(self, client):
        case_id = new_case(client)
        response = client.get(f"/cases/{case_id}")
        assert response.status_code == 200
        body = response.json()
        assert body["case"]["name"] == "demo" and body["seq"] == 1

    def test_unknown_case_404(self, client):
        assert client.get("/cases/0000000000000000000000000X").status_code == 404

    def test_list_cases(self, client):
        new_case(client, "one")
        new_case(client, "two")
        assert len(client.get("/cases").json()["cases"]) == 2


class TestErrorMapping:
    def test_self_move_400(self, client):
        case_id = new_case(client)
        target = client.post(
            f"/cases/{case_id}/targets", json={"label": "a", "first_seen": T[0]}
        ).json()["target_id"]
        response = client.post(
            f"/cases/{case_id}/edges",
            json={"kind": "move", "source": target, "dest": target, "at": T[1], "technique": "x"},
        )
        assert response.status_code == 400
        assert response.json()["error"] == "SelfMove"

    def test_closure_blocked_409(self, client):
        case_id = new_case(client)
        client.post(f"/cases/{case_id}/targets", json={"label": "orphan", "first_seen": T[0]})
        response = client.post(f"/cases/{case_id}/close", json={})
        assert response.status_code == 409
        assert response.json()["error"] == "ClosureBlocked"
        assert response.json()["detail"]["unresolved_targets"]

    def test_invalid_state_409(self, client):
        case_id = new_case(client)
        question = client.post(
            f"/cases/{case_id}/questions", json={"text": "How did the attacker(s) get onto the system?"}
        ).json()["question_id"]
        response = client.post(
            f"/cases/{case_id}/hypotheses",
            json={"question": question, "statement": "premature"},
        )
        assert response.status_code == 409
        assert response.json()["error"] == "InvalidState"

    def test_mutation_on_closed_case_409(self, client):
        case_id = new_case(client)
        assert client.post(f"/cases/{case_id}/close", json={}).status_code == 200
        response = client.post(
            f"/cases/{case_id}/targets", json={"label": "late", "first_seen": T[0]}
        )
        assert response.status_code == 409
        assert response.json()["error"] == "CaseClosed"


class TestWorkflowOverHttp:
    def test_full_loop_to_closure(self, client):
        case_id = new_case(client)
        target = client.post(
            f"/cases/{case_id}/targets", json={"label": "web-01", "first_seen": T[0]}
        ).json()["target_id"]
        upload = client.post(
            "/evidence",
            files={"file": ("mail.log", b"dropper.doc attached")},
            data={"case_id": case_id, "category": "misc", "description": "mail log"},
        )
        assert upload.status_code == 201
        evidence_id = upload.json()["evidence_id"]
        edge = client.post(
            f"/cases/{case_id}/edges",
            json={
                "kind": "initial_compromise", "dest": target, "at": T[0],
                "vector": "spearphish", "evidence": [evidence_id],
            },
        )
        assert edge.status_code == 201
        question = client.post(
            f"/cases/{case_id}/questions",
            json={"text": "How did the attacker(s) get onto the system?", "scope": target},
        ).json()["question_id"]
        step = client.post(
            f"/cases/{case_id}/collection-steps",
            json={"question": question, "category": "misc", "source_description": "mail archive"},
        ).json()["step_id"]
        client.post(f"/cases/{case_id}/collection-steps/{step}/attach", json={"evidence": [evidence_id]})
        hypothesis = client.post(
            f"/cases/{case_id}/hypotheses",
            json={"question": question, "statement": "phish entry", "supporting": [evidence_id]},
        ).json()["hypothesis_id"]
        # Unscoped checks route: the service locates the hypothesis's case.
        check = client.post(
            f"/hypotheses/{hypothesis}/checks",
            json={"description": "timestamps align", "outcome": "verified", "evidence": [evidence_id]},
        )
        assert check.status_code == 201
        assert check.json()["hypothesis_state"] == "verified"
        answer = client.post(
            f"/cases/{case_id}/questions/{question}/answer", json={"hypothesis": hypothesis}
        )
        assert answer.status_code == 200
        closure = client.get(f"/cases/{case_id}/closure").json()
        assert closure["closed_allowed"] is True
        assert client.post(f"/cases/{case_id}/close", json={}).status_code == 200

    def test_every_mutation_returns_seq(self, client):
        case_id = new_case(client)
        seqs = [
            client.post(
                f"/cases/{case_id}/targets", json={"label": f"t{i}", "first_seen": T[0]}
            ).json()["seq"]
            for i in range(3)
        ]
        assert seqs == [2, 3, 4]

    def test_custody_endpoint(self, client):
        case_id = new_case(client)
        client.post(
            "/evidence",
            files={"file": ("a.bin", b"bytes")},
            data={"case_id": case_id, "category": "host", "description": "x"},
        )
        body = client.get(f"/cases/{case_id}/custody").json()
        assert body["result"]["ok"] is True
        assert [e["action"] for e in body["entries"]] == ["ingested"]

    def test_verify_endpoint(self, client):
        case_id = new_case(client)
        evidence_id = client.post(
            "/evidence",
            files={"file": ("a.bin", b"bytes")},
            data={"case_id": case_id, "category": "host", "description": "x"},
        ).json()["evidence_id"]
        body = client.post(f"/cases/{case_id}/evidence/{evidence_id}/verify", json={}).json()
        assert body["status"] == "ok"


class TestOutputsOverHttp:
    def test_dot_and_report(self, client):
        case_id = new_case(client)
        dot = client.get(f"/cases/{case_id}/graph.dot")
        assert dot.status_code == 200
        assert dot.headers["content-type"].startswith("text/vnd.graphviz")
        assert dot.text.startswith("digraph attack")
        report = client.get(f"/cases/{case_id}/report.md", params={"generated_at": T[5]})
        assert report.status_code == 200
        assert report.text.startswith("# Attack Investigation Report")

    def test_report_default_timestamp_is_last_event(self, client):
        case_id = new_case(client)
        first = client.get(f"/cases/{case_id}/report.md").text
        second = client.get(f"/cases/{case_id}/report.md").text
        assert first == second  # deterministic without explicit generated_at

    def test_openapi_served(self, client):
        spec = client.get("/openapi.json")
        assert spec.status_code == 200
        assert "/cases/{case_id}/events" in spec.json()["paths"]


class TestEventFeed:
    def test_events_since_zero_gapless(self, client):
        case_id = new_case(client)
        for i in range(4):
            client.post(f"/cases/{case_id}/targets", json={"label": f"t{i}", "first_seen": T[0]})
        body = client.get(f"/cases/{case_id}/events", params={"since": 0}).json()
        assert [e["seq"] for e in body["events"]] == [1, 2, 3, 4, 5]
        assert body["seq"] == 5

    def test_events_since_offset(self, client):
        case_id = new_case(client)
        client.post(f"/cases/{case_id}/targets", json={"label": "a", "first_seen": T[0]})
        body = client.get(f"/cases/{case_id}/events", params={"since": 1}).json()
        assert [e["seq"] for e in body["events"]] == [2]

    def test_longpoll_sees_cli_mutations_in_one_cycle(self, root, client):
        """Five CLI-made events arrive in a single long-poll response."""
        case_id = new_case(client)
        runner = CliRunner()

        def mutate():
            time.sleep(0.3)
            for i in range(5):
                result = runner.invoke(
                    cli,
                    ["--home", str(root), "target", "add", "--case", case_id,
                     "--label", f"cli-host-{i}", "--first-seen", T[0]],
                    catch_exceptions=False,
                )
                assert result.exit_code == 0

        writer = threading.Thread(target=mutate)
        writer.start()
        try:
            body = client.get(
                f"/cases/{case_id}/events", params={"since": 1, "wait": 10}
            ).json()
        finally:
            writer.join()
        assert len(body["events"]) >= 1  # first arrivals within one poll
        final = client.get(f"/cases/{case_id}/events", params={"since": 1}).json()
        assert [e["seq"] for e in final["events"]] == [2, 3, 4, 5, 6]
        labels = [e["payload"]["label"] for e in final["events"]]
        assert labels == [f"cli-host-{i}" for i in range(5)]


class TestAdapterEquivalence:
    def test_identical_journals_from_cli_and_http(self, tmp_path, monkeypatch):
        """Same logical ops through both adapters produce identical journal bytes."""
        monkeypatch.setenv("FLOWER_SEED", "equiv-7")
        cli_home = tmp_path / "via-cli"
        http_home = tmp_path / "via-http"
        runner = CliRunner()

        def run_cli(*args):
            result = runner.invoke(cli, ["--home", str(cli_home), *args], catch_exceptions=False)
            assert result.exit_code == 0, result.output
            return result.output.strip()

        case_cli = run_cli("case", "new", "--name", "equal", "--opened-at", T[0])
        target_cli = run_cli(
            "target", "add", "--case", case_cli, "--label", "web", "--first-seen", T[0], "--at", T[1]
        )
        run_cli(
            "compromise", "add", "--case", case_cli, "--to", target_cli,
            "--when", T[0], "--vector", "phish", "--at", T[2],
        )
        run_cli(
            "question", "add", "--case", case_cli, "--text", "How?", "--target", target_cli, "--at", T[3]
        )

        http = TestClient(create_app(http_home))
        case_http = http.post("/cases", json={"name": "equal", "opened_at": T[0]}).json()["case_id"]
        target_http = http.post(
            f"/cases/{case_http}/targets",
            json={"label": "web", "first_seen": T[0], "recorded_at": T[1]},
        ).json()["target_id"]
        http.post(
            f"/cases/{case_http}/edges",
            json={"kind": "initial_compromise", "dest": target_http, "at": T[0],
                  "vector": "phish", "recorded_at": T[2]},
        )
        http.post(
            f"/cases/{case_http}/questions",
            json={"text": "How?", "scope": target_http, "recorded_at": T[3]},
        )

        assert case_cli == case_http and target_cli == target_http
        cli_journal = (cli_home / case_cli / "journal.jsonl").read_bytes()
        http_journal = (http_home / case_http / "journal.jsonl").read_bytes()
        assert cli_journal == http_journal

    def test_evidence_ingest_equivalent_with_shared_key(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FLOWER_SEED", "equiv-9")
        cli_home = tmp_path / "via-cli"
        http_home = tmp_path / "via-http"
        runner = CliRunner()

        http = TestClient(create_app(http_home))
        case_http = http.post("/cases", json={"name": "ev", "opened_at": T[0]}).json()["case_id"]
        http.post(
            "/evidence",
            files={"file": ("a.bin", b"shared bytes")},
            data={"case_id": case_http, "category": "host", "description": "d", "recorded_at": T[1]},
        )

        # The HTTP side created the seeded service key; point the CLI at it.
        service_key = http_home / "service_key.pem"
        result = runner.invoke(
            cli, ["--home", str(cli_home), "case", "new", "--name", "ev", "--opened-at", T[0]],
            catch_exceptions=False,
        )
        case_cli = result.output.strip()
        blob = tmp_path / "a.bin"
        blob.write_bytes(b"shared bytes")
        result = runner.invoke(
            cli,
            ["--home", str(cli_home), "evidence", "ingest", "--case", case_cli,
             "--file", str(blob), "--category", "host", "--description", "d",
             "--key", str(service_key), "--key-id", "service", "--at", T[1]],
            catch_exceptions=False,
        )
        assert result.exit_code == 0
        cli_journal = (cli_home / case_cli / "journal.jsonl").read_bytes()
        http_journal = (http_home / case_http / "journal.jsonl").read_bytes()
        assert cli_journal == http_journal


class TestUiMount:
    def test_static_assets_served_when_configured(self, tmp_path):
        ui_dir = tmp_path / "dist"
        ui_dir.mkdir()
        (ui_dir / "index.html").write_text("<!doctype html><title>workbench</title>")
        client = TestClient(create_app(tmp_path / "cases", ui_dir=ui_dir))
        response = client.get("/ui/")
        assert response.status_code == 200
        assert "workbench" in response.text
