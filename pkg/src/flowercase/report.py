"""Rendered case outputs: DOT graph, canonical case file, audit report, timeline.

All four are pure functions of (case, explicit timestamp args): identical
inputs produce identical bytes. The report is CommonMark with nine fixed
sections; every entity's full id appears exactly once, in its own section,
while cross-references use a short suffix form — the completeness checker
relies on that convention.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .canonical import canonical_json
from .investigation import QuestionState, closure_status
from .journal import state_digest
from .model import Case, EdgeKind, case_from_export, case_to_export
from .timestamps import parse_ts


def short_ref(entity_id: str) -> str:
    """Display form for cross-references; full ids stay unique to one section."""
    return f"…{entity_id[-6:]}"


def _refs(ids: list[str]) -> str:
    return ", ".join(short_ref(i) for i in ids) if ids else "(none)"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(case: Case) -> str:
    """Graphviz DOT: one cluster per target flower, edges labeled with timestamps."""
    lines = [
        "digraph attack {",
        "  rankdir=LR;",
        '  node [fontname="Helvetica"];',
        f'  "attacker" [label="{_dot_escape(case.attacker.label)}", shape=diamond, style=filled, fillcolor="#f6d6d6"];',
    ]
    for target_id in sorted(case.targets):
        target = case.targets[target_id]
        lines.append(f'  subgraph "cluster_{target_id}" {{')
        lines.append(f'    label="{_dot_escape(target.label)}";')
        lines.append(
            f'    "t_{target_id}" [label="{_dot_escape(target.label)}\\nfirst seen {target.first_seen}", '
            'shape=box, style=filled, fillcolor="#dbe9f6"];'
        )
        for leaf in sorted(target.leaves, key=lambda l: l.id):
            label = f"{leaf.kind.value}\\n{leaf.observed_from} .. {leaf.observed_to}"
            lines.append(f'    "l_{leaf.id}" [label="{_dot_escape(label)}", shape=ellipse];')
        lines.append("  }")
    # Exactly one -> statement per EdgeEvent: DOT edge count mirrors the model.
    for edge_id in sorted(case.edges):
        edge = case.edges[edge_id]
        source = "attacker" if edge.source == "attacker" else f"t_{edge.source}"
        style = "bold" if edge.kind == EdgeKind.INITIAL_COMPROMISE else "solid"
        lines.append(
            f'  "{source}" -> "t_{edge.dest}" '
            f'[label="{_dot_escape(edge.at)}", style={style}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_case_json(case: Case) -> str:
    return canonical_json(case_to_export(case)) + "\n"


def import_case_json(text: str) -> Case:
    return case_from_export(json.loads(text))


def timeline(case: Case) -> list[dict[str, Any]]:
    """Edges and leaves merged, ordered by (timestamp, id)."""
    entries: list[dict[str, Any]] = []
    for edge in case.edges.values():
        source = "attacker" if edge.source == "attacker" else edge.source
        entries.append(
            {
                "at": edge.at,
                "entity": "edge",
                "id": edge.id,
                "summary": f"{edge.kind.value}: {source} -> {edge.dest} ({edge.vector})",
            }
        )
    for target in case.targets.values():
        for leaf in target.leaves:
            entries.append(
                {
                    "at": leaf.observed_from,
                    "entity": "leaf",
                    "id": leaf.id,
                    "summary": f"{leaf.kind.value} on {target.label}: {leaf.description}",
                }
            )
    entries.sort(key=lambda e: (e["at"], e["id"]))
    return entries


def _md_row(cells: list[str]) -> str:
    safe = [c.replace("|", "\\|").replace("\n", " ") for c in cells]
    return "| " + " | ".join(safe) + " |"


def _md_table(header: list[str], rows: list[list[str]]) -> list[str]:
    lines = [_md_row(header), "|" + "|".join(" --- " for _ in header) + "|"]
    lines.extend(_md_row(r) for r in rows)
    return lines


def generate_report(case: Case, generated_at: str) -> str:
    """The audit report: nine fixed sections, deterministic for (case, generated_at)."""
    parse_ts(generated_at)
    out: list[str] = []
    add = out.append

    stamp = "FINAL" if not case.is_open() else "DRAFT"
    add(f"# Attack Investigation Report: {case.name}")
    add("")
    add(f"- case: `{case.id}`")
    add(f"- status: {case.state.value} ({stamp})")
    add(f"- opened: {case.opened_at}" + (f", closed: {case.closed_at} by {case.closed_by}" if case.closed_at else ""))
    add(f"- generated: {generated_at}")
    add(f"- state digest: `{state_digest(case)}`")
    add("")

    add("## 1. Case Summary")
    add("")
    add(f"Attacker node: {case.attacker.label}")
    if case.attacker.info_gathering_notes:
        add("")
        add(f"Information gathering notes: {case.attacker.info_gathering_notes}")
    add("")
    counts = [
        ("targets", len(case.targets)),
        ("edges", len(case.edges)),
        ("action leaves", sum(len(t.leaves) for t in case.targets.values())),
        ("questions", len(case.questions)),
        ("collection steps", len(case.collection_steps)),
        ("hypotheses", len(case.hypotheses)),
        ("evidence items", len(case.evidence)),
        ("custody entries", len(case.custody)),
        ("iterations", len(case.iterations)),
    ]
    out.extend(_md_table(["entity", "count"], [[k, str(v)] for k, v in counts]))
    add("")

    add("## 2. Attack Graph")
    add("")
    add("Rendered graph: see `graph.dot` (Graphviz).")
    add("")
    add("### Edges")
    add("")
    if case.edges:
        rows = []
        for edge_id in sorted(case.edges):
            edge = case.edges[edge_id]
            source = "attacker" if edge.source == "attacker" else short_ref(edge.source)
            rows.append(
                [
                    f"`{edge.id}`",
                    edge.kind.value,
                    f"{source} -> {short_ref(edge.dest)}",
                    edge.at,
                    edge.vector,
                    _refs(edge.evidence),
                ]
            )
        out.extend(_md_table(["id", "kind", "route", "at", "vector", "evidence"], rows))
    else:
        add("No edges recorded.")
    add("")
    for target_id in sorted(case.targets):
        target = case.targets[target_id]
        add(f"### Target {target.label} (`{target.id}`)")
        add("")
        add(f"First seen {target.first_seen}." + (f" Notes: {target.notes}" if target.notes else ""))
        add("")
        if target.leaves:
            rows = [
                [
                    f"`{leaf.id}`",
                    leaf.kind.value,
                    f"{leaf.observed_from} .. {leaf.observed_to}",
                    leaf.description,
                    leaf.technique or "",
                    _refs(leaf.evidence),
                ]
                for leaf in sorted(target.leaves, key=lambda l: l.id)
            ]
            out.extend(
                _md_table(["leaf", "kind", "interval", "description", "technique", "evidence"], rows)
            )
        else:
            add("No actions recorded on this target.")
        add("")

    add("## 3. Questions")
    add("")
    if case.questions:
        for question_id in sorted(case.questions):
            question = case.questions[question_id]
            scope = "case-wide" if question.scope is None else f"target {short_ref(question.scope)}"
            add(f"- `{question.id}` [{question.state.value}] ({scope}): {question.text}")
            if question.spawned_from:
                add(f"  - spawned from hypothesis {short_ref(question.spawned_from)}")
            if question.answer:
                add(f"  - answered by hypothesis {short_ref(question.answer)}")
    else:
        add("No questions posed.")
    add("")

    add("## 4. Collection Steps")
    add("")
    if case.collection_steps:
        rows = []
        for step_id in sorted(case.collection_steps):
            step = case.collection_steps[step_id]
            yield_text = (
                f"{len(step.collected)}: {_refs(step.collected)}"
                if step.collected
                else ("empty yield" if step.status.value == "done" else "pending")
            )
            rows.append(
                [
                    f"`{step.id}`",
                    short_ref(step.question),
                    step.category.value,
                    step.source_description,
                    step.status.value,
                    yield_text,
                ]
            )
        out.extend(_md_table(["id", "question", "category", "source", "status", "yield"], rows))
    else:
        add("No collection steps planned.")
    add("")

    add("## 5. Filters Applied")
    add("")
    if case.filter_runs:
        for index, run in enumerate(case.filter_runs, start=1):
            add(
                f"{index}. {run.at} by {run.actor}: `{canonical_json(run.expression)}` "
                f"matched {len(run.matched)} ({_refs(run.matched)})"
            )
    else:
        add("No filters were recorded.")
    add("")

    add("## 6. Hypotheses and Verification")
    add("")
    if case.hypotheses:
        for hypothesis_id in sorted(case.hypotheses):
            hypothesis = case.hypotheses[hypothesis_id]
            add(
                f"- `{hypothesis.id}` [{hypothesis.state.value}] for question "
                f"{short_ref(hypothesis.question)}: {hypothesis.statement}"
            )
            add(f"  - supporting evidence: {_refs(hypothesis.supporting)}")
            for check in sorted(hypothesis.checks, key=lambda c: c.id):
                add(
                    f"  - check `{check.id}` [{check.outcome.value}] at {check.at} by {check.actor}: "
                    f"{check.description} (evidence: {_refs(check.evidence)})"
                )
    else:
        add("No hypotheses proposed.")
    add("")

    add("## 7. Evidence Inventory")
    add("")
    if case.evidence:
        rows = []
        for evidence_id in sorted(case.evidence):
            item = case.evidence[evidence_id]
            rows.append(
                [
                    f"`{item.id}`",
                    f"`{item.content_hash}`",
                    str(item.size_bytes),
                    item.category.value,
                    short_ref(item.source_target) if item.source_target else "",
                    f"{item.acquired_at} by {item.acquired_by}",
                    item.description,
                ]
            )
        out.extend(
            _md_table(["id", "sha256", "bytes", "category", "source", "acquired", "description"], rows)
        )
        add("")
        add("### Custody chain")
        add("")
        if case.custody:
            rows = [
                [
                    str(entry.seq),
                    entry.action.value,
                    short_ref(entry.evidence),
                    entry.actor,
                    entry.at,
                    entry.signer_key_id,
                ]
                for entry in case.custody
            ]
            out.extend(_md_table(["seq", "action", "evidence", "actor", "at", "signer"], rows))
        else:
            add("No custody entries.")
    else:
        add("No evidence ingested.")
    add("")

    add("## 8. Iteration History")
    add("")
    rows = [
        [str(r.seq), r.trigger, r.opened_at, r.closed_at or "open"]
        for r in case.iterations
    ]
    if rows:
        out.extend(_md_table(["seq", "trigger", "opened", "closed"], rows))
    else:
        add("No iterations recorded.")
    add("")

    add("## 9. Closure Status")
    add("")
    report = closure_status(case)
    add(f"- closed_allowed: {'yes' if report.closed_allowed else 'no'}")
    if report.open_questions:
        add(f"- unanswered questions: {_refs(report.open_questions)}")
    if report.unresolved_targets:
        add(f"- targets with unresolved origin: {_refs(report.unresolved_targets)}")
    if report.violations:
        add("- graph violations:")
        for violation in report.violations:
            add(f"  - {violation.rule} on {short_ref(violation.entity)}: {violation.message}")
    if report.unsupported:
        add(
            "- warnings (entities without evidence): "
            + ", ".join(f"{w['entity']} {short_ref(w['id'])}" for w in report.unsupported)
        )
    if report.closed_allowed and case.is_open():
        add("- the case satisfies the closure predicate and may be closed")
    add("")
    return "\n".join(out)


def write_case_files(
    case: Case, directory: str | Path, generated_at: str
) -> dict[str, Path]:
    """Write report.md, graph.dot and case.json under the case directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": directory / "report.md",
        "dot": directory / "graph.dot",
        "json": directory / "case.json",
    }
    paths["report"].write_text(generate_report(case, generated_at), encoding="utf-8")
    paths["dot"].write_text(export_dot(case), encoding="utf-8")
    paths["json"].write_text(export_case_json(case), encoding="utf-8")
    return paths
