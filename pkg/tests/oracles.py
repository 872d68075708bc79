"""Independent brute-force oracles.

Everything here re-derives expected results by a different route than the
implementation under test: reachability by fixpoint relaxation instead of
BFS, path enumeration via networkx, filters by per-item boolean evaluation,
closure by re-reading raw journal lines, stats by naive recount. Keep these
free of imports from the package's algorithm code paths — they only consume
plain data (dicts extracted from cases or journal lines).
"""

from __future__ import annotations

import re
from typing import Any

import networkx as nx

ATTACKER = "attacker"
GENESIS = "0" * 64
LEAF_KINDS = [
    "escalate_privileges",
    "maintain_access",
    "information_gathering",
    "actions_on_objective",
    "cover_tracks",
    "move",
]

ID_TOKEN = re.compile(r"\b[0-9A-HJKMNP-TV-Z]{26}\b")


# ---------------------------------------------------------------------------
# Raw graph shape shared by the oracles: plain dicts, no package types.


def raw_from_case_dict(case: dict[str, Any]) -> dict[str, Any]:
    """Extract the graph portion of an exported case dict."""
    leaves = []
    for target in case.get("targets", []):
        leaves.extend(target.get("leaves", []))
    return {
        "targets": {t["id"]: t for t in case.get("targets", [])},
        "edges": {e["id"]: e for e in case.get("edges", [])},
        "leaves": leaves,
        "evidence_ids": {item["id"] for item in case.get("evidence", [])},
    }


def raw_from_journal(events: list[dict[str, Any]]) -> dict[str, Any]:
    """Rebuild the tracked entities straight from journal event dicts."""
    targets: dict[str, dict] = {}
    edges: dict[str, dict] = {}
    leaves: list[dict] = []
    questions: dict[str, dict] = {}
    hypotheses: dict[str, dict] = {}
    evidence_ids: set[str] = set()
    closed = False
    for event in events:
        kind = event["kind"]
        p = event["payload"]
        if kind == "add_target":
            targets[p["target_id"]] = {
                "id": p["target_id"],
                "label": p["label"],
                "first_seen": p["first_seen"],
                "leaves": [],
            }
        elif kind == "record_initial_compromise":
            edges[p["edge_id"]] = {
                "id": p["edge_id"],
                "kind": "initial_compromise",
                "source": ATTACKER,
                "dest": p["dest"],
                "at": p["at"],
                "evidence": list(p["evidence"]),
            }
        elif kind == "record_move":
            edges[p["edge_id"]] = {
                "id": p["edge_id"],
                "kind": "move",
                "source": p["source"],
                "dest": p["dest"],
                "at": p["at"],
                "evidence": list(p["evidence"]),
            }
            leaves.append(
                {
                    "id": p["leaf_id"],
                    "target": p["source"],
                    "kind": "move",
                    "observed_from": p["at"],
                    "observed_to": p["at"],
                    "move_edge": p["edge_id"],
                    "evidence": list(p["evidence"]),
                }
            )
        elif kind == "record_action":
            leaves.append(
                {
                    "id": p["leaf_id"],
                    "target": p["target"],
                    "kind": p["kind"],
                    "observed_from": p["observed_from"],
                    "observed_to": p["observed_to"],
                    "move_edge": None,
                    "evidence": list(p["evidence"]),
                }
            )
        elif kind == "pose_question":
            questions[p["question_id"]] = {
                "scope": p.get("scope"),
                "state": "open",
                "answer": None,
            }
        elif kind == "plan_collection":
            q = questions[p["question_id"]]
            if q["state"] == "open":
                q["state"] = "collecting"
        elif kind == "propose_hypothesis":
            hypotheses[p["hypothesis_id"]] = {
                "question": p["question_id"],
                "supporting": list(p["supporting"]),
                "state": "proposed",
            }
            questions[p["question_id"]]["state"] = "hypothesizing"
        elif kind == "record_check":
            h = hypotheses[p["hypothesis_id"]]
            h["state"] = "verified" if p["outcome"] == "verified" else "refuted"
        elif kind == "answer_question":
            q = questions[p["question_id"]]
            q["state"] = "answered"
            q["answer"] = p["hypothesis_id"]
        elif kind == "withdraw_question":
            questions[p["question_id"]]["state"] = "withdrawn"
        elif kind == "ingest_evidence":
            evidence_ids.add(p["evidence_id"])
        elif kind == "close_case":
            closed = True
    for leaf in leaves:
        targets[leaf["target"]]["leaves"].append(leaf)
    return {
        "targets": targets,
        "edges": edges,
        "leaves": leaves,
        "evidence_ids": evidence_ids,
        "questions": questions,
        "hypotheses": hypotheses,
        "closed": closed,
    }


# ---------------------------------------------------------------------------
# Graph rule oracle


def _reachable_fixpoint(raw: dict[str, Any]) -> set[str]:
    """Reachability by repeated relaxation until nothing changes."""
    reached = {ATTACKER}
    changed = True
    while changed:
        changed = False
        for edge in raw["edges"].values():
            if edge["dest"] not in raw["targets"]:
                continue
            source_ok = edge["source"] == ATTACKER or edge["source"] in raw["targets"]
            if source_ok and edge["source"] in reached and edge["dest"] not in reached:
                reached.add(edge["dest"])
                changed = True
    reached.discard(ATTACKER)
    return reached


TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$")


def oracle_violations(raw: dict[str, Any]) -> set[tuple[str, str]]:
    """Expected (rule, entity) pairs, re-derived rule by rule."""
    found: set[tuple[str, str]] = set()
    targets = raw["targets"]
    edges = raw["edges"]

    for edge in edges.values():
        bad = False
        if edge["dest"] not in targets:
            bad = True
        if edge["kind"] == "initial_compromise":
            if edge["source"] != ATTACKER:
                bad = True
        else:
            if edge["source"] == ATTACKER or edge["source"] not in targets:
                bad = True
            elif edge["source"] == edge["dest"]:
                bad = True
        if not TS_RE.match(edge["at"]):
            bad = True
        if bad:
            found.add(("malformed_edge", edge["id"]))

    inbound: dict[str, list[dict]] = {tid: [] for tid in targets}
    for edge in edges.values():
        if edge["dest"] in inbound:
            inbound[edge["dest"]].append(edge)

    for tid in targets:
        if not inbound[tid]:
            found.add(("unresolved_origin", tid))

    reachable = _reachable_fixpoint(raw)
    for tid in targets:
        if inbound[tid] and tid not in reachable:
            found.add(("unreachable", tid))

    for edge in edges.values():
        if edge["kind"] != "move" or edge["source"] not in targets:
            continue
        source_inbound = inbound.get(edge["source"], [])
        if not source_inbound:
            found.add(("temporal_violation", edge["id"]))
        elif edge["at"] < min(e["at"] for e in source_inbound):
            found.add(("temporal_violation", edge["id"]))

    claimed: set[str] = set()
    ordered_leaves = sorted(raw["leaves"], key=lambda l: l["id"])
    for leaf in ordered_leaves:
        if leaf["kind"] != "move":
            if leaf.get("move_edge") is not None:
                found.add(("malformed_leaf", leaf["id"]))
            continue
        ref = leaf.get("move_edge")
        edge = edges.get(ref) if ref else None
        ok = (
            edge is not None
            and edge["kind"] == "move"
            and edge["source"] == leaf["target"]
            and ref not in claimed
        )
        if ok:
            claimed.add(ref)
        else:
            found.add(("move_leaf_unpaired", leaf["id"]))
    for edge in edges.values():
        if edge["kind"] == "move" and edge["id"] not in claimed:
            found.add(("move_edge_unpaired", edge["id"]))

    for leaf in ordered_leaves:
        if not TS_RE.match(leaf["observed_from"]) or not TS_RE.match(leaf["observed_to"]):
            found.add(("invalid_interval", leaf["id"]))
        elif leaf["observed_from"] > leaf["observed_to"]:
            found.add(("invalid_interval", leaf["id"]))

    for edge in edges.values():
        for eid in edge["evidence"]:
            if eid not in raw["evidence_ids"]:
                found.add(("dangling_evidence", edge["id"]))
    for leaf in ordered_leaves:
        for eid in leaf["evidence"]:
            if eid not in raw["evidence_ids"]:
                found.add(("dangling_evidence", leaf["id"]))
    return found


# ---------------------------------------------------------------------------
# Path enumeration oracle (networkx)


def oracle_paths(raw: dict[str, Any], target_id: str) -> list[list[str]]:
    graph = nx.MultiDiGraph()
    graph.add_node(ATTACKER)
    for tid in raw["targets"]:
        graph.add_node(tid)
    for edge in raw["edges"].values():
        source_ok = edge["source"] == ATTACKER or edge["source"] in raw["targets"]
        if source_ok and edge["dest"] in raw["targets"]:
            graph.add_edge(edge["source"], edge["dest"], key=edge["id"])
    paths = []
    try:
        for path in nx.all_simple_edge_paths(graph, ATTACKER, target_id):
            paths.append([key for (_, _, key) in path])
    except nx.NodeNotFound:
        return []
    paths.sort(key=lambda p: (len(p), p))
    return paths


# ---------------------------------------------------------------------------
# Filter oracle: per-item boolean predicate over the raw expression dict


def _item_matches(item: dict[str, Any], expr: dict[str, Any]) -> bool:
    (node, args), = expr.items()
    if node == "and":
        return all(_item_matches(item, child) for child in args)
    if node == "or":
        return any(_item_matches(item, child) for child in args)
    if node == "not":
        return not _item_matches(item, args)
    if node == "category":
        return item["category"] == args
    if node == "target":
        return item.get("source_target") == args
    if node == "keyword":
        needle = args.lower()
        return needle in item["description"].lower() or needle in item["acquired_by"].lower()
    if node == "time_range":
        at = item["acquired_at"]
        if "from" in args and at < args["from"]:
            return False
        if "to" in args and at > args["to"]:
            return False
        return True
    raise AssertionError(f"unknown node {node}")


def oracle_filter(items: list[dict[str, Any]], expr: dict[str, Any]) -> list[str]:
    return sorted(item["id"] for item in items if _item_matches(item, expr))


# ---------------------------------------------------------------------------
# Closure oracle: the three predicates straight from journal lines


def oracle_closed_allowed(events: list[dict[str, Any]]) -> bool:
    raw = raw_from_journal(events)
    unanswered = [
        q for q in raw["questions"].values() if q["state"] not in ("answered", "withdrawn")
    ]
    if unanswered:
        return False
    if oracle_violations(raw):
        return False
    inbound: dict[str, list[dict]] = {tid: [] for tid in raw["targets"]}
    for edge in raw["edges"].values():
        if edge["dest"] in inbound:
            inbound[edge["dest"]].append(edge)
    for tid in raw["targets"]:
        proven = False
        for edge in inbound[tid]:
            edge_evidence = set(edge["evidence"])
            if not edge_evidence:
                continue
            for q in raw["questions"].values():
                if q["scope"] != tid or q["state"] != "answered":
                    continue
                hypothesis = raw["hypotheses"].get(q["answer"])
                if hypothesis and edge_evidence & set(hypothesis["supporting"]):
                    proven = True
                    break
            if proven:
                break
        if not proven:
            return False
    return True


# ---------------------------------------------------------------------------
# Corpus stats oracle


def oracle_stats(case_dicts: list[dict[str, Any]]) -> dict[str, Any]:
    ordered = sorted(case_dicts, key=lambda c: c["id"])
    presence = []
    totals = {kind: 0 for kind in LEAF_KINDS}
    target_counts = []
    multi = 0
    for case in ordered:
        target_counts.append(len(case.get("targets", [])))
        if len(case.get("targets", [])) >= 2:
            multi += 1
        kinds_here = set()
        for target in case.get("targets", []):
            for leaf in target.get("leaves", []):
                kinds_here.add(leaf["kind"])
                totals[leaf["kind"]] += 1
        presence.append([kind in kinds_here for kind in LEAF_KINDS])
    return {
        "cases": len(ordered),
        "multi_target_cases": multi,
        "case_ids": [c["id"] for c in ordered],
        "per_case_target_counts": target_counts,
        "leaf_presence": presence,
        "leaf_totals": totals,
    }


# ---------------------------------------------------------------------------
# Report cross-reference checker


def journal_entity_ids(events: list[dict[str, Any]]) -> dict[str, str]:
    """Map of every created entity id -> entity kind, from raw journal lines."""
    ids: dict[str, str] = {}
    for event in events:
        p = event["payload"]
        kind = event["kind"]
        if kind == "create_case":
            ids[p["case_id"]] = "case"
        elif kind == "add_target":
            ids[p["target_id"]] = "target"
        elif kind == "record_initial_compromise":
            ids[p["edge_id"]] = "edge"
        elif kind == "record_move":
            ids[p["edge_id"]] = "edge"
            ids[p["leaf_id"]] = "leaf"
        elif kind == "record_action":
            ids[p["leaf_id"]] = "leaf"
        elif kind == "pose_question":
            ids[p["question_id"]] = "question"
        elif kind == "plan_collection":
            ids[p["step_id"]] = "step"
        elif kind == "propose_hypothesis":
            ids[p["hypothesis_id"]] = "hypothesis"
        elif kind == "record_check":
            ids[p["check_id"]] = "check"
        elif kind == "ingest_evidence":
            ids[p["evidence_id"]] = "evidence"
    return ids


def crossref_report(events: list[dict[str, Any]], report_text: str) -> list[str]:
    """Return problems: journaled entities missing/duplicated, plus orphans."""
    expected = journal_entity_ids(events)
    problems = []
    tokens = ID_TOKEN.findall(report_text)
    for entity_id, entity_kind in expected.items():
        count = tokens.count(entity_id)
        if count == 0:
            problems.append(f"{entity_kind} {entity_id} missing from report")
        elif count > 1:
            problems.append(f"{entity_kind} {entity_id} appears {count} times")
    for token in set(tokens):
        if token not in expected:
            problems.append(f"orphan id {token} in report")
    return problems


# ---------------------------------------------------------------------------
# Minimal DOT well-formedness checker


def check_dot(text: str) -> list[str]:
    """Structural checks: digraph wrapper, balanced braces/quotes/brackets."""
    problems = []
    stripped = text.strip()
    if not stripped.startswith("digraph"):
        problems.append("missing digraph header")
    if not stripped.endswith("}"):
        problems.append("missing closing brace")
    depth = 0
    in_string = False
    escaped = False
    brackets = 0
    for ch in text:
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                problems.append("unbalanced braces")
                break
        elif ch == "[":
            brackets += 1
        elif ch == "]":
            brackets -= 1
            if brackets < 0:
                problems.append("unbalanced brackets")
                break
    if in_string:
        problems.append("unterminated string")
    if depth != 0:
        problems.append("unbalanced braces")
    if brackets != 0:
        problems.append("unbalanced brackets")
    return problems
