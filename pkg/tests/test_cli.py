import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from flowercase.cli import cli

T = [f"2019-02-0{i}T0{i}:00:00Z" for i in range(1, 10)]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def home(tmp_path):
    return str(tmp_path / "cases")


def invoke(runner, home, args, json_out=False, **kwargs):
    base = ["--home", home] + (["--json"] if json_out else [])
    return runner.invoke(cli, base + args, catch_exceptions=False, **kwargs)


def make_case(runner, home, name="demo"):
    result = invoke(runner, home, ["case", "new", "--name", name, "--opened-at", T[0]])
    assert result.exit_code == 0, result.output
    return result.output.strip()


class TestCaseCommands:
    def test_new_prints_id(self, runner, home):
        case_id = make_case(runner, home)
        assert len(case_id) == 26

    def test_empty_name_is_domain_error(self, runner, home):
        result = invoke(runner, home, ["case", "new", "--name", ""])
        assert result.exit_code == 1
        error = json.loads(result.stderr.strip())
        assert error["error"] == "EmptyName"

    def test_usage_error_exit_two(self, runner, home):
        result = invoke(runner, home, ["move", "add"])  # everything missing
        assert result.exit_code == 2

    def test_status_json(self, runner, home):
        case_id = make_case(runner, home)
        result = invoke(runner, home, ["case", "status", "--case", case_id], json_out=True)
        data = json.loads(result.output)
        assert data["state"] == "open" and data["seq"] == 1
        assert data["closure"]["closed_allowed"] is True

    def test_resolve_by_unique_name(self, runner, home):
        case_id = make_case(runner, home, name="op-oak")
        result = invoke(runner, home, ["case", "status", "--case", "op-oak"], json_out=True)
        assert json.loads(result.output)["case_id"] == case_id

    def test_unknown_case_not_found(self, runner, home):
        result = invoke(runner, home, ["case", "status", "--case", "op-ghost"])
        assert result.exit_code == 1
        assert json.loads(result.stderr)["error"] == "NotFound"

    def test_list(self, runner, home):
        make_case(runner, home, name="one")
        make_case(runner, home, name="two")
        result = invoke(runner, home, ["case", "list"], json_out=True)
        assert len(json.loads(result.output)["cases"]) == 2


class TestGraphCommands:
    def test_self_move_maps_to_exit_one(self, runner, home):
        case_id = make_case(runner, home)
        t1 = invoke(
            runner, home,
            ["target", "add", "--case", case_id, "--label", "web", "--first-seen", T[0]],
        ).output.strip()
        result = invoke(
            runner, home,
            ["move", "add", "--case", case_id, "--from", t1, "--to", t1,
             "--when", T[1], "--technique", "x"],
        )
        assert result.exit_code == 1
        assert json.loads(result.stderr)["error"] == "SelfMove"

    def test_compromise_and_action_flow(self, runner, home, tmp_path):
        case_id = make_case(runner, home)
        t1 = invoke(
            runner, home,
            ["target", "add", "--case", case_id, "--label", "web", "--first-seen", T[0]],
        ).output.strip()
        blob = tmp_path / "mail.log"
        blob.write_bytes(b"dropper.doc attached")
        evidence_id = invoke(
            runner, home,
            ["evidence", "ingest", "--case", case_id, "--file", str(blob),
             "--category", "misc", "--description", "mail log"],
        ).output.strip()
        result = invoke(
            runner, home,
            ["compromise", "add", "--case", case_id, "--to", t1, "--when", T[0],
             "--vector", "spearphish", "--evidence", evidence_id],
        )
        assert result.exit_code == 0
        result = invoke(
            runner, home,
            ["action", "add", "--case", case_id, "--target", t1,
             "--kind", "escalate_privileges", "--start", T[1], "--end", T[1],
             "--description", "kernel exploit", "--evidence", evidence_id],
            json_out=True,
        )
        assert result.exit_code == 0
        # create, target, register_key, ingest, compromise, action
        assert json.loads(result.output)["seq"] == 6


class TestEvidenceCommands:
    def test_ingest_stdin_and_verify(self, runner, home):
        case_id = make_case(runner, home)
        result = invoke(
            runner, home,
            ["evidence", "ingest", "--case", case_id, "--file", "-",
             "--category", "host", "--description", "piped capture"],
            input="piped evidence bytes",
        )
        evidence_id = result.output.strip()
        verify = invoke(
            runner, home, ["evidence", "verify", "--case", case_id, "--id", evidence_id]
        )
        assert verify.exit_code == 0 and verify.output.startswith("ok ")

    def test_verify_detects_tamper(self, runner, home, tmp_path):
        case_id = make_case(runner, home)
        blob = tmp_path / "x.bin"
        blob.write_bytes(b"original")
        evidence_id = invoke(
            runner, home,
            ["evidence", "ingest", "--case", case_id, "--file", str(blob),
             "--category", "host", "--description", "x"],
        ).output.strip()
        export = invoke(runner, home, ["export", "json", "--case", case_id, "--output", "-"])
        content_hash = json.loads(export.output)["case"]["evidence"][0]["content_hash"]
        stored = Path(home) / case_id / "vault" / content_hash[:2] / content_hash
        stored.write_bytes(b"originaX")
        result = invoke(runner, home, ["evidence", "verify", "--case", case_id, "--id", evidence_id])
        assert result.exit_code == 1
        assert json.loads(result.stderr)["error"] == "Mismatch"


class TestJournalCommands:
    def test_verify_and_replay(self, runner, home):
        case_id = make_case(runner, home)
        invoke(runner, home, ["target", "add", "--case", case_id, "--label", "a", "--first-seen", T[0]])
        verify = invoke(runner, home, ["journal", "verify", "--case", case_id], json_out=True)
        assert json.loads(verify.output) == {"ok": True, "events": 2}
        replay = invoke(runner, home, ["journal", "replay", "--case", case_id])
        digest = replay.output.strip()
        assert len(digest) == 64
        assert (Path(home) / case_id / "state.sha256").read_text().strip() == digest

    def test_verify_tampered_exits_one(self, runner, home):
        case_id = make_case(runner, home)
        invoke(runner, home, ["target", "add", "--case", case_id, "--label", "a", "--first-seen", T[0]])
        journal_path = Path(home) / case_id / "journal.jsonl"
        journal_path.write_text(journal_path.read_text().replace("analyst", "mallory"))
        result = invoke(runner, home, ["journal", "verify", "--case", case_id])
        assert result.exit_code == 1
        error = json.loads(result.stderr)
        assert error["error"] == "JournalTampered" and error["detail"]["seq"] == 1


class TestOutputs:
    def test_report_dot_json_written(self, runner, home):
        case_id = make_case(runner, home)
        for args in (["report", "--case", case_id, "--generated-at", T[5]],
                     ["export", "dot", "--case", case_id],
                     ["export", "json", "--case", case_id],
                     ["export", "manifest", "--case", case_id]):
            result = invoke(runner, home, args)
            assert result.exit_code == 0, result.output
        case_dir = Path(home) / case_id
        for filename in ("report.md", "graph.dot", "case.json", "manifest.json", "manifest.json.sha256"):
            assert (case_dir / filename).exists()

    def test_stats_on_samples(self, runner):
        samples = str(Path(__file__).resolve().parent.parent / "sample_cases")
        result = CliRunner().invoke(cli, ["stats", samples, "--format", "md"], catch_exceptions=False)
        assert result.exit_code == 0
        lines = result.output.strip().split("\n")
        assert len(lines) == 6 + 2

    def test_filter_run_records(self, runner, home):
        case_id = make_case(runner, home)
        result = invoke(
            runner, home,
            ["filter", "run", "--case", case_id, "--expr", '{"keyword":"ssh"}'],
            json_out=True,
        )
        assert json.loads(result.output) == {"matched": [], "count": 0}

    def test_filter_bad_json_usage_error(self, runner, home):
        case_id = make_case(runner, home)
        result = invoke(runner, home, ["filter", "run", "--case", case_id, "--expr", "{nope"])
        assert result.exit_code == 2


class TestServeGuard:
    def test_remote_bind_refused_without_flag(self, runner, home):
        result = invoke(runner, home, ["serve", "--bind", "0.0.0.0:9"])
        assert result.exit_code == 2
        assert "allow-remote" in result.stderr
