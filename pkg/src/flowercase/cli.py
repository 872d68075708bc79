"""The ``flower`` command line interface.

Thin adapter over the engine: every subcommand maps to one module operation
and produces the same journal events the HTTP service would. Exit codes:
0 success, 1 domain error (single JSON object on stderr), 2 usage error.
``--json`` switches stdout to machine-readable output.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any

import click

from .corpus import corpus_stats, emit_stats, load_corpus
from .engine import CaseEngine, CaseStore
from .errors import DomainError, Mismatch, JournalTampered
from .journal import write_state_digest
from .report import write_case_files
from .timestamps import now_ts
from .vault import SigningKey

DEFAULT_HOME = "./cases"


class FlowerGroup(click.Group):
    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except DomainError as exc:
            click.echo(json.dumps(exc.to_dict(), sort_keys=True), err=True)
            ctx.exit(1)


def _emit(ctx: click.Context, data: dict[str, Any], human: str | None = None) -> None:
    if ctx.obj["json"]:
        click.echo(json.dumps(data, indent=2, sort_keys=True))
    else:
        click.echo(human if human is not None else json.dumps(data, indent=2, sort_keys=True))


def _store(ctx: click.Context) -> CaseStore:
    return CaseStore(ctx.obj["home"])


def _open(ctx: click.Context, case_ref: str) -> CaseEngine:
    store = _store(ctx)
    return store.open_case(store.resolve_case(case_ref))


def _signing_key(ctx: click.Context, key_path: str | None, key_id: str | None) -> SigningKey:
    if key_path:
        return SigningKey.load_pem(key_path, key_id=key_id)
    key = _store(ctx).service_key()
    if key_id:
        key.key_id = key_id
    return key


case_option = click.option(
    "--case", "case_ref", required=True, envvar="FLOWER_CASE", help="Case id (or unique case name)."
)
actor_option = click.option("--actor", default="analyst", show_default=True)
at_option = click.option("--at", "recorded_at", default=None, help="Documentation timestamp (default: now).")
evidence_option = click.option(
    "--evidence", "evidence", multiple=True, help="Evidence id (repeatable)."
)


@click.group(cls=FlowerGroup)
@click.option(
    "--home",
    envvar="FLOWER_HOME",
    default=DEFAULT_HOME,
    show_default=True,
    help="Case root directory.",
)
@click.option("--json", "json_out", is_flag=True, help="Machine-readable output.")
@click.pass_context
def cli(ctx: click.Context, home: str, json_out: bool) -> None:
    """Flower-model investigation case engine."""
    ctx.ensure_object(dict)
    ctx.obj["home"] = home
    ctx.obj["json"] = json_out


# -- case ---------------------------------------------------------------------


@cli.group()
def case() -> None:
    """Create, inspect and close cases."""


@case.command("new")
@click.option("--name", required=True)
@click.option("--opened-at", default=None)
@actor_option
@click.pass_context
def case_new(ctx: click.Context, name: str, opened_at: str | None, actor: str) -> None:
    """Open a new case and print its id."""
    engine = _store(ctx).create_case(name, opened_at=opened_at, actor=actor)
    _emit(ctx, {"case_id": engine.case.id, "seq": 1}, engine.case.id)


@case.command("status")
@case_option
@click.pass_context
def case_status(ctx: click.Context, case_ref: str) -> None:
    """Show case state and the closure report."""
    engine = _open(ctx, case_ref)
    report = engine.closure_status()
    seq, _ = engine.journal.tail()
    data = {
        "case_id": engine.case.id,
        "name": engine.case.name,
        "state": engine.case.state.value,
        "seq": seq,
        "closure": report.to_dict(),
    }
    lines = [
        f"case {engine.case.id} ({engine.case.name}) state={engine.case.state.value} events={seq}",
        f"closed_allowed: {report.closed_allowed}",
    ]
    if report.open_questions:
        lines.append(f"unanswered questions: {', '.join(report.open_questions)}")
    if report.unresolved_targets:
        lines.append(f"unresolved origins: {', '.join(report.unresolved_targets)}")
    for violation in report.violations:
        lines.append(f"violation {violation.rule} on {violation.entity}: {violation.message}")
    if report.unsupported:
        lines.append(f"warnings: {len(report.unsupported)} entities without evidence")
    _emit(ctx, data, "\n".join(lines))


@case.command("close")
@case_option
@actor_option
@at_option
@click.pass_context
def case_close(ctx: click.Context, case_ref: str, actor: str, recorded_at: str | None) -> None:
    """Close the case (fails with the closure report while blockers remain)."""
    engine = _open(ctx, case_ref)
    engine.close_case(actor=actor, at=recorded_at)
    seq, _ = engine.journal.tail()
    _emit(ctx, {"case_id": engine.case.id, "state": "closed", "seq": seq}, "closed")


@case.command("annotate")
@case_option
@click.option("--notes", required=True, help="Attacker information-gathering notes.")
@actor_option
@at_option
@click.pass_context
def case_annotate(ctx, case_ref: str, notes: str, actor: str, recorded_at: str | None) -> None:
    """Record attacker-side OSINT notes."""
    engine = _open(ctx, case_ref)
    engine.set_attacker_notes(notes, actor=actor, at=recorded_at)
    seq, _ = engine.journal.tail()
    _emit(ctx, {"case_id": engine.case.id, "seq": seq}, "ok")


@case.command("list")
@click.pass_context
def case_list(ctx: click.Context) -> None:
    """List case ids in the store."""
    store = _store(ctx)
    rows = []
    for cid in store.list_case_ids():
        engine = store.open_case(cid)
        rows.append({"case_id": cid, "name": engine.case.name, "state": engine.case.state.value})
    _emit(ctx, {"cases": rows}, "\n".join(f"{r['case_id']}  {r['state']:<6}  {r['name']}" for r in rows))


# -- graph construction ----------------------------------------------------------


@cli.group()
def target() -> None:
    """Compromised systems (the flowers)."""


@target.command("add")
@case_option
@click.option("--label", required=True)
@click.option("--first-seen", required=True)
@actor_option
@at_option
@click.pass_context
def target_add(ctx, case_ref, label, first_seen, actor, recorded_at) -> None:
    """Add a target; connect it later via compromise/move."""
    engine = _open(ctx, case_ref)
    node = engine.add_target(label, first_seen, actor=actor, at=recorded_at)
    seq, _ = engine.journal.tail()
    _emit(ctx, {"target_id": node.id, "seq": seq}, node.id)


@cli.group()
def compromise() -> None:
    """Initial-compromise edges (attacker -> target)."""


@compromise.command("add")
@case_option
@click.option("--to", "dest", required=True, help="Target id.")
@click.option("--when", required=True, help="Attack-event timestamp.")
@click.option("--vector", required=True)
@evidence_option
@actor_option
@at_option
@click.pass_context
def compromise_add(ctx, case_ref, dest, when, vector, evidence, actor, recorded_at) -> None:
    engine = _open(ctx, case_ref)
    edge = engine.record_initial_compromise(
        dest, when, vector, list(evidence), actor=actor, at=recorded_at
    )
    seq, _ = engine.journal.tail()
    _emit(ctx, {"edge_id": edge.id, "seq": seq}, edge.id)


@cli.group()
def move() -> None:
    """Lateral-movement edges (target -> target)."""


@move.command("add")
@case_option
@click.option("--from", "source", required=True, help="Source target id.")
@click.option("--to", "dest", required=True, help="Destination target id.")
@click.option("--when", required=True, help="Attack-event timestamp.")
@click.option("--technique", required=True)
@evidence_option
@actor_option
@at_option
@click.pass_context
def move_add(ctx, case_ref, source, dest, when, technique, evidence, actor, recorded_at) -> None:
    engine = _open(ctx, case_ref)
    edge, leaf = engine.record_move(
        source, dest, when, technique, list(evidence), actor=actor, at=recorded_at
    )
    seq, _ = engine.journal.tail()
    _emit(ctx, {"edge_id": edge.id, "leaf_id": leaf.id, "seq": seq}, edge.id)


@cli.group()
def action() -> None:
    """Action leaves on a target (all kinds except move)."""


@action.command("add")
@case_option
@click.option("--target", "target_id", required=True)
@click.option(
    "--kind",
    required=True,
    type=click.Choice(
        [
            "escalate_privileges",
            "maintain_access",
            "information_gathering",
            "actions_on_objective",
            "cover_tracks",
        ]
    ),
)
@click.option("--start", required=True, help="Observed-from timestamp.")
@click.option("--end", required=True, help="Observed-to timestamp.")
@click.option("--description", required=True)
@click.option("--technique", default=None)
@evidence_option
@actor_option
@at_option
@click.pass_context
def action_add(
    ctx, case_ref, target_id, kind, start, end, description, technique, evidence, actor, recorded_at
) -> None:
    engine = _open(ctx, case_ref)
    leaf = engine.record_action(
        target_id,
        kind,
        start,
        end,
        description,
        technique=technique,
        evidence=list(evidence),
        actor=actor,
        at=recorded_at,
    )
    seq, _ = engine.journal.tail()
    _emit(ctx, {"leaf_id": leaf.id, "seq": seq}, leaf.id)


# -- investigation workflow ----------------------------------------------------


@cli.group()
def question() -> None:
    """Investigation questions."""


@question.command("add")
@case_option
@click.option("--text", required=True)
@click.option("--target", "target_id", default=None, help="Scope to a target (default: case-wide).")
@click.option("--spawned-from", default=None, help="Hypothesis id this question grew from.")
@actor_option
@at_option
@click.pass_context
def question_add(ctx, case_ref, text, target_id, spawned_from, actor, recorded_at) -> None:
    engine = _open(ctx, case_ref)
    q = engine.pose_question(
        text, scope=target_id, spawned_from=spawned_from, actor=actor, at=recorded_at
    )
    seq, _ = engine.journal.tail()
    _emit(ctx, {"question_id": q.id, "seq": seq}, q.id)


@question.command("answer")
@case_option
@click.option("--question", "question_id", required=True)
@click.option("--hypothesis", "hypothesis_id", required=True)
@actor_option
@at_option
@click.pass_context
def question_answer(ctx, case_ref, question_id, hypothesis_id, actor, recorded_at) -> None:
    engine = _open(ctx, case_ref)
    q = engine.answer_question(question_id, hypothesis_id, actor=actor, at=recorded_at)
    seq, _ = engine.journal.tail()
    _emit(ctx, {"question_id": q.id, "state": q.state.value, "seq": seq}, "answered")


@question.command("withdraw")
@case_option
@click.option("--question", "question_id", required=True)
@click.option("--reason", default=None)
@actor_option
@at_option
@click.pass_context
def question_withdraw(ctx, case_ref, question_id, reason, actor, recorded_at) -> None:
    engine = _open(ctx, case_ref)
    q = engine.withdraw_question(question_id, reason=reason, actor=actor, at=recorded_at)
    seq, _ = engine.journal.tail()
    _emit(ctx, {"question_id": q.id, "state": q.state.value, "seq": seq}, "withdrawn")


@cli.group()
def collect() -> None:
    """Collection steps against questions."""


@collect.command("plan")
@case_option
@click.option("--question", "question_id", required=True)
@click.option("--category", required=True, type=click.Choice(["host", "network", "misc"]))
@click.option("--source", "source_description", required=True)
@actor_option
@at_option
@click.pass_context
def collect_plan(ctx, case_ref, question_id, category, source_description, actor, recorded_at) -> None:
    engine = _open(ctx, case_ref)
    step = engine.plan_collection(
        question_id, category, source_description, actor=actor, at=recorded_at
    )
    seq, _ = engine.journal.tail()
    _emit(ctx, {"step_id": step.id, "seq": seq}, step.id)


@collect.command("attach")
@case_option
@click.option("--step", "step_id", required=True)
@evidence_option
@actor_option
@at_option
@click.pass_context
def collect_attach(ctx, case_ref, step_id, evidence, actor, recorded_at) -> None:
    """Mark a step done with its yield (possibly empty)."""
    engine = _open(ctx, case_ref)
    step = engine.attach_collected(step_id, list(evidence), actor=actor, at=recorded_at)
    seq, _ = engine.journal.tail()
    _emit(ctx, {"step_id": step.id, "status": step.status.value, "seq": seq}, "done")


@cli.group(name="filter")
def filter_group() -> None:
    """Metadata filters over the evidence vault."""


@filter_group.command("run")
@case_option
@click.option("--expr", required=True, help='Filter JSON, e.g. {"and":[{"category":"host"},{"keyword":"ssh"}]}')
@actor_option
@at_option
@click.pass_context
def filter_run(ctx, case_ref, expr, actor, recorded_at) -> None:
    """Evaluate a filter and record the run in the journal."""
    try:
        expression = json.loads(expr)
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"--expr is not valid JSON: {exc}") from exc
    engine = _open(ctx, case_ref)
    matched = engine.run_filter(expression, actor=actor, at=recorded_at)
    _emit(ctx, {"matched": matched, "count": len(matched)}, "\n".join(matched))


@cli.group()
def hypothesis() -> None:
    """Hypotheses and verification checks."""


@hypothesis.command("add")
@case_option
@click.option("--question", "question_id", required=True)
@click.option("--statement", required=True)
@click.option("--supporting", multiple=True, help="Supporting evidence id (repeatable).")
@actor_option
@at_option
@click.pass_context
def hypothesis_add(ctx, case_ref, question_id, statement, supporting, actor, recorded_at) -> None:
    engine = _open(ctx, case_ref)
    h = engine.propose_hypothesis(
        question_id, statement, list(supporting), actor=actor, at=recorded_at
    )
    seq, _ = engine.journal.tail()
    _emit(ctx, {"hypothesis_id": h.id, "seq": seq}, h.id)


@hypothesis.command("check")
@case_option
@click.option("--hypothesis", "hypothesis_id", required=True)
@click.option("--description", required=True)
@click.option("--outcome", required=True, type=click.Choice(["verified", "refuted"]))
@evidence_option
@actor_option
@at_option
@click.pass_context
def hypothesis_check(
    ctx, case_ref, hypothesis_id, description, outcome, evidence, actor, recorded_at
) -> None:
    engine = _open(ctx, case_ref)
    check = engine.record_check(
        hypothesis_id, description, outcome, list(evidence), actor=actor, at=recorded_at
    )
    state = engine.case.hypotheses[hypothesis_id].state.value
    seq, _ = engine.journal.tail()
    _emit(
        ctx,
        {"check_id": check.id, "hypothesis_state": state, "seq": seq},
        f"{check.id} -> {state}",
    )


# -- evidence ---------------------------------------------------------------------


@cli.group()
def evidence() -> None:
    """Evidence vault operations."""


@evidence.command("ingest")
@case_option
@click.option("--file", "file_path", required=True, help="Path to the evidence bytes, or - for stdin.")
@click.option("--category", required=True, type=click.Choice(["host", "network", "misc"]))
@click.option("--description", required=True)
@click.option("--source-target", default=None)
@click.option("--key", "key_path", default=None, help="Ed25519 private key PEM (default: store service key).")
@click.option("--key-id", default=None)
@actor_option
@at_option
@click.pass_context
def evidence_ingest(
    ctx, case_ref, file_path, category, description, source_target, key_path, key_id, actor, recorded_at
) -> None:
    if file_path == "-":
        data = sys.stdin.buffer.read()
    else:
        path = Path(file_path)
        if not path.is_file():
            raise click.UsageError(f"no such file: {file_path}")
        data = path.read_bytes()
    engine = _open(ctx, case_ref)
    key = _signing_key(ctx, key_path, key_id)
    item, entry = engine.ingest_evidence(
        data,
        category,
        description,
        key,
        source_target=source_target,
        actor=actor,
        at=recorded_at,
    )
    seq, _ = engine.journal.tail()
    _emit(
        ctx,
        {
            "evidence_id": item.id,
            "content_hash": item.content_hash,
            "size_bytes": item.size_bytes,
            "custody_seq": entry.seq,
            "seq": seq,
        },
        item.id,
    )


@evidence.command("verify")
@case_option
@click.option("--id", "evidence_id", required=True)
@click.option("--key", "key_path", default=None)
@click.option("--key-id", default=None)
@actor_option
@at_option
@click.pass_context
def evidence_verify(ctx, case_ref, evidence_id, key_path, key_id, actor, recorded_at) -> None:
    """Recompute the stored blob hash; records the attempt either way."""
    engine = _open(ctx, case_ref)
    key = _signing_key(ctx, key_path, key_id)
    result = engine.verify_item(evidence_id, key, actor=actor, at=recorded_at)
    if not result.ok:
        raise Mismatch(
            f"stored bytes for {evidence_id} do not match the recorded hash",
            result.to_dict(),
        )
    _emit(ctx, result.to_dict(), f"ok {result.expected}")


# -- journal ---------------------------------------------------------------------


@cli.group()
def journal() -> None:
    """Journal integrity and replay."""


@journal.command("verify")
@case_option
@click.pass_context
def journal_verify(ctx, case_ref) -> None:
    store = _store(ctx)
    case_id = store.resolve_case(case_ref)
    journal_file = CaseEngine(store.case_dir(case_id)).journal
    result = journal_file.verify()
    if not result.ok:
        raise JournalTampered(
            f"journal broken at seq {result.break_seq} ({result.reason})",
            {"seq": result.break_seq, "reason": result.reason},
        )
    seq, _ = journal_file.tail()
    _emit(ctx, {"ok": True, "events": seq}, f"ok ({seq} events)")


@journal.command("replay")
@case_option
@click.pass_context
def journal_replay(ctx, case_ref) -> None:
    """Replay the journal, write state.sha256 and print the digest."""
    engine = _open(ctx, case_ref)
    digest = engine.state_digest()
    write_state_digest(engine.case, engine.case_dir)
    seq, _ = engine.journal.tail()
    _emit(ctx, {"state_digest": digest, "events": seq}, digest)


# -- outputs ---------------------------------------------------------------------


@cli.command("report")
@case_option
@click.option("--generated-at", default=None, help="Report timestamp (default: last event's).")
@click.option("--output", default=None, help="Path or - for stdout (default: <case dir>/report.md).")
@click.pass_context
def report_cmd(ctx, case_ref, generated_at, output) -> None:
    """Generate the audit report."""
    from .report import generate_report

    engine = _open(ctx, case_ref)
    if generated_at is None:
        events = engine.journal.read_events()
        generated_at = events[-1].at if events else now_ts()
    text = generate_report(engine.case, generated_at)
    if output == "-":
        click.echo(text, nl=False)
        return
    path = Path(output) if output else engine.case_dir / "report.md"
    path.write_text(text, encoding="utf-8")
    _emit(ctx, {"path": str(path)}, str(path))


@cli.group()
def export() -> None:
    """Case exports."""


@export.command("dot")
@case_option
@click.option("--output", default=None, help="Path or - for stdout (default: <case dir>/graph.dot).")
@click.pass_context
def export_dot_cmd(ctx, case_ref, output) -> None:
    from .report import export_dot

    engine = _open(ctx, case_ref)
    text = export_dot(engine.case)
    if output == "-":
        click.echo(text, nl=False)
        return
    path = Path(output) if output else engine.case_dir / "graph.dot"
    path.write_text(text, encoding="utf-8")
    _emit(ctx, {"path": str(path)}, str(path))


@export.command("json")
@case_option
@click.option("--output", default=None, help="Path or - for stdout (default: <case dir>/case.json).")
@click.pass_context
def export_json_cmd(ctx, case_ref, output) -> None:
    from .report import export_case_json

    engine = _open(ctx, case_ref)
    text = export_case_json(engine.case)
    if output == "-":
        click.echo(text, nl=False)
        return
    path = Path(output) if output else engine.case_dir / "case.json"
    path.write_text(text, encoding="utf-8")
    _emit(ctx, {"path": str(path)}, str(path))


@export.command("manifest")
@case_option
@click.pass_context
def export_manifest_cmd(ctx, case_ref) -> None:
    """Write manifest.json + sidecar hash for evidence handover."""
    engine = _open(ctx, case_ref)
    path = engine.export_manifest()
    _emit(ctx, {"path": str(path)}, str(path))


@cli.command("stats")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "md"]), show_default=True)
@click.pass_context
def stats_cmd(ctx, directory, fmt) -> None:
    """Corpus statistics over *.case.json files in DIRECTORY."""
    result = load_corpus(directory)
    for error in result.errors:
        click.echo(json.dumps(error, sort_keys=True), err=True)
    click.echo(emit_stats(corpus_stats(result.cases), fmt), nl=False)
    if result.errors:
        sys.exit(1)


@cli.command("serve")
@click.option("--bind", default="127.0.0.1:8787", show_default=True)
@click.option("--allow-remote", is_flag=True, help="Permit non-loopback binds.")
@click.option("--ui-dir", default=None, help="Static workbench assets to serve at /ui.")
@click.pass_context
def serve_cmd(ctx, bind, allow_remote, ui_dir) -> None:
    """Run the JSON-over-HTTP service (workbench backend)."""
    from .server import run_server

    host, _, port_text = bind.partition(":")
    try:
        port = int(port_text or "8787")
    except ValueError:
        raise click.UsageError(f"invalid port in --bind: {bind!r}") from None
    if host not in ("127.0.0.1", "localhost", "::1") and not allow_remote:
        raise click.UsageError(
            f"refusing non-loopback bind {host!r} without --allow-remote "
            "(the v1 service has no transport auth)"
        )
    if allow_remote and host not in ("127.0.0.1", "localhost", "::1"):
        click.echo(f"warning: serving without authentication on {host}:{port}", err=True)
    run_server(ctx.obj["home"], host, port, ui_dir=ui_dir)


def main() -> None:
    cli(prog_name="flower")


if __name__ == "__main__":
    main()
