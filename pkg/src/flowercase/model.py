"""The flower model: attacker, target flowers, action leaves, and edges.

Each compromised system is a target node carrying action leaves of the six
kinds; edges are either the attacker's initial compromise of a target or a
lateral move between targets. Together they form a validated attack
multigraph rooted at the single attacker node. The Case aggregate holds the
graph plus the investigation entities, evidence metadata, custody chain and
iteration history; its canonical dict form is the byte source for state
digests and the exported case file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from .errors import NotFound, UnsupportedSchema, ValidationFailed
from .filters import FilterRun
from .investigation import Hypothesis, IterationRecord, Question, CollectionStep, _enum
from .timestamps import is_ts
from .vault import CustodyEntry, EvidenceItem

CASE_SCHEMA = "flowercase/1"

# Sentinel edge source for initial-compromise edges. Target ids are 26-char
# base32 strings, so the sentinel cannot collide with one.
ATTACKER = "attacker"


class LeafKind(str, Enum):
    ESCALATE_PRIVILEGES = "escalate_privileges"
    MAINTAIN_ACCESS = "maintain_access"
    INFORMATION_GATHERING = "information_gathering"
    ACTIONS_ON_OBJECTIVE = "actions_on_objective"
    COVER_TRACKS = "cover_tracks"
    MOVE = "move"


class EdgeKind(str, Enum):
    INITIAL_COMPROMISE = "initial_compromise"
    MOVE = "move"


class CaseState(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass
class AttackerNode:
    """The single attacker-perspective node; OSINT phase lives in the notes."""

    label: str = "attacker"
    info_gathering_notes: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "info_gathering_notes": self.info_gathering_notes}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AttackerNode":
        return cls(
            label=data.get("label", "attacker"),
            info_gathering_notes=data.get("info_gathering_notes"),
        )


@dataclass
class ActionLeaf:
    """One attacker action on a target. Move leaves pair 1:1 with move edges."""

    id: str
    target: str
    kind: LeafKind
    observed_from: str
    observed_to: str
    description: str
    technique: Optional[str] = None
    evidence: list[str] = field(default_factory=list)
    move_edge: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "target": self.target,
            "kind": self.kind.value,
            "observed_from": self.observed_from,
            "observed_to": self.observed_to,
            "description": self.description,
            "technique": self.technique,
            "evidence": list(self.evidence),
            "move_edge": self.move_edge,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ActionLeaf":
        return cls(
            id=data["id"],
            target=data["target"],
            kind=_enum(LeafKind, data["kind"], "leaf kind"),
            observed_from=data["observed_from"],
            observed_to=data["observed_to"],
            description=data["description"],
            technique=data.get("technique"),
            evidence=list(data.get("evidence", [])),
            move_edge=data.get("move_edge"),
        )


@dataclass
class EdgeEvent:
    """A compromise event: attacker→target or target→target, timestamped."""

    id: str
    kind: EdgeKind
    source: str  # ATTACKER sentinel or a target id
    dest: str
    at: str
    vector: str
    evidence: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "source": self.source,
            "dest": self.dest,
            "at": self.at,
            "vector": self.vector,
            "evidence": list(self.evidence),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EdgeEvent":
        return cls(
            id=data["id"],
            kind=_enum(EdgeKind, data["kind"], "edge kind"),
            source=data["source"],
            dest=data["dest"],
            at=data["at"],
            vector=data["vector"],
            evidence=list(data.get("evidence", [])),
        )


@dataclass
class TargetNode:
    """A compromised system: the flower, with its action leaves."""

    id: str
    label: str
    first_seen: str
    leaves: list[ActionLeaf] = field(default_factory=list)
    notes: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "label": self.label,
            "first_seen": self.first_seen,
            "leaves": [leaf.to_dict() for leaf in sorted(self.leaves, key=lambda l: l.id)],
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TargetNode":
        return cls(
            id=data["id"],
            label=data["label"],
            first_seen=data["first_seen"],
            leaves=[ActionLeaf.from_dict(l) for l in data.get("leaves", [])],
            notes=data.get("notes", ""),
        )


@dataclass
class Violation:
    """One broken model rule: (rule id, offending entity id, message)."""

    rule: str
    entity: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"rule": self.rule, "entity": self.entity, "message": self.message}


@dataclass
class Case:
    """Root aggregate. State is always a deterministic replay of the journal."""

    id: str
    name: str
    opened_at: str
    state: CaseState = CaseState.OPEN
    attacker: AttackerNode = field(default_factory=AttackerNode)
    targets: dict[str, TargetNode] = field(default_factory=dict)
    edges: dict[str, EdgeEvent] = field(default_factory=dict)
    questions: dict[str, Question] = field(default_factory=dict)
    collection_steps: dict[str, CollectionStep] = field(default_factory=dict)
    hypotheses: dict[str, Hypothesis] = field(default_factory=dict)
    evidence: dict[str, EvidenceItem] = field(default_factory=dict)
    custody: list[CustodyEntry] = field(default_factory=list)
    signer_keys: dict[str, str] = field(default_factory=dict)
    iterations: list[IterationRecord] = field(default_factory=list)
    filter_runs: list[FilterRun] = field(default_factory=list)
    closed_at: Optional[str] = None
    closed_by: Optional[str] = None

    def is_open(self) -> bool:
        return self.state == CaseState.OPEN

    def current_iteration(self) -> Optional[IterationRecord]:
        for record in reversed(self.iterations):
            if record.closed_at is None:
                return record
        return None

    def find_leaf(self, leaf_id: str) -> Optional[ActionLeaf]:
        for target in self.targets.values():
            for leaf in target.leaves:
                if leaf.id == leaf_id:
                    return leaf
        return None

    def inbound_edges(self, target_id: str) -> list[EdgeEvent]:
        return sorted(
            (e for e in self.edges.values() if e.dest == target_id),
            key=lambda e: e.id,
        )

    def to_dict(self) -> dict[str, Any]:
        """Canonical dict form; arrays in id (or seq) order."""
        return {
            "id": self.id,
            "name": self.name,
            "opened_at": self.opened_at,
            "state": self.state.value,
            "attacker": self.attacker.to_dict(),
            "targets": [self.targets[t].to_dict() for t in sorted(self.targets)],
            "edges": [self.edges[e].to_dict() for e in sorted(self.edges)],
            "questions": [self.questions[q].to_dict() for q in sorted(self.questions)],
            "collection_steps": [
                self.collection_steps[s].to_dict() for s in sorted(self.collection_steps)
            ],
            "hypotheses": [self.hypotheses[h].to_dict() for h in sorted(self.hypotheses)],
            "evidence": [self.evidence[e].to_dict() for e in sorted(self.evidence)],
            "custody": [entry.to_dict() for entry in self.custody],
            "signer_keys": [
                {"key_id": k, "public_key": self.signer_keys[k]}
                for k in sorted(self.signer_keys)
            ],
            "iterations": [record.to_dict() for record in self.iterations],
            "filter_runs": [run.to_dict() for run in self.filter_runs],
            "closed_at": self.closed_at,
            "closed_by": self.closed_by,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Case":
        """Rebuild a case from its dict form; missing collections default empty."""
        try:
            case = cls(
                id=data["id"],
                name=data["name"],
                opened_at=data["opened_at"],
                state=_enum(CaseState, data.get("state", "open"), "case state"),
                attacker=AttackerNode.from_dict(data.get("attacker", {})),
                closed_at=data.get("closed_at"),
                closed_by=data.get("closed_by"),
            )
            for entry in data.get("targets", []):
                target = TargetNode.from_dict(entry)
                case.targets[target.id] = target
            for entry in data.get("edges", []):
                edge = EdgeEvent.from_dict(entry)
                case.edges[edge.id] = edge
            for entry in data.get("questions", []):
                question = Question.from_dict(entry)
                case.questions[question.id] = question
            for entry in data.get("collection_steps", []):
                step = CollectionStep.from_dict(entry)
                case.collection_steps[step.id] = step
            for entry in data.get("hypotheses", []):
                hypothesis = Hypothesis.from_dict(entry)
                case.hypotheses[hypothesis.id] = hypothesis
            for entry in data.get("evidence", []):
                item = EvidenceItem.from_dict(entry)
                case.evidence[item.id] = item
            case.custody = [CustodyEntry.from_dict(e) for e in data.get("custody", [])]
            for entry in data.get("signer_keys", []):
                case.signer_keys[entry["key_id"]] = entry["public_key"]
            case.iterations = [
                IterationRecord.from_dict(e) for e in data.get("iterations", [])
            ]
            case.filter_runs = [FilterRun.from_dict(e) for e in data.get("filter_runs", [])]
        except (KeyError, TypeError) as exc:
            raise ValidationFailed(f"malformed case data: {exc}") from exc
        return case


def case_to_export(case: Case) -> dict[str, Any]:
    return {"schema": CASE_SCHEMA, "case": case.to_dict()}


def case_from_export(data: Any) -> Case:
    if not isinstance(data, dict):
        raise UnsupportedSchema("case file root is not an object")
    schema = data.get("schema")
    if schema != CASE_SCHEMA:
        raise UnsupportedSchema(f"expected schema {CASE_SCHEMA!r}, got {schema!r}")
    if not isinstance(data.get("case"), dict):
        raise ValidationFailed("case file is missing the 'case' object")
    return Case.from_dict(data["case"])


def _reachable_from_attacker(case: Case) -> set[str]:
    """Targets reachable by BFS from the attacker along edge direction."""
    seen: set[str] = set()
    frontier = [ATTACKER]
    adjacency: dict[str, list[str]] = {}
    for edge in case.edges.values():
        if edge.dest in case.targets and (
            edge.source == ATTACKER or edge.source in case.targets
        ):
            adjacency.setdefault(edge.source, []).append(edge.dest)
    while frontier:
        node = frontier.pop()
        for dest in adjacency.get(node, ()):  # noqa: B909 - adjacency is static
            if dest not in seen:
                seen.add(dest)
                frontier.append(dest)
    return seen


def validate_graph(case: Case) -> list[Violation]:
    """Check every model rule; pure, never raises, deterministic order."""
    violations: list[Violation] = []
    edges = [case.edges[e] for e in sorted(case.edges)]
    targets = [case.targets[t] for t in sorted(case.targets)]

    for edge in edges:
        problems = []
        if edge.dest not in case.targets:
            problems.append(f"dest {edge.dest} is not a known target")
        if edge.kind == EdgeKind.INITIAL_COMPROMISE:
            if edge.source != ATTACKER:
                problems.append("initial_compromise source must be the attacker")
        else:
            if edge.source == ATTACKER or edge.source not in case.targets:
                problems.append(f"move source {edge.source} is not a known target")
            elif edge.source == edge.dest:
                problems.append("move edge loops onto its own target")
        if not is_ts(edge.at):
            problems.append(f"bad timestamp {edge.at!r}")
        for problem in problems:
            violations.append(Violation("malformed_edge", edge.id, problem))

    for target in targets:
        if not case.inbound_edges(target.id):
            violations.append(
                Violation(
                    "unresolved_origin",
                    target.id,
                    f"target {target.label!r} has no inbound compromise or move edge",
                )
            )

    reachable = _reachable_from_attacker(case)
    for target in targets:
        if case.inbound_edges(target.id) and target.id not in reachable:
            violations.append(
                Violation(
                    "unreachable",
                    target.id,
                    f"target {target.label!r} is not reachable from the attacker",
                )
            )

    for edge in edges:
        if edge.kind != EdgeKind.MOVE or edge.source not in case.targets:
            continue
        inbound = case.inbound_edges(edge.source)
        if not inbound:
            violations.append(
                Violation(
                    "temporal_violation",
                    edge.id,
                    "move edge leaves a target that was never compromised",
                )
            )
        else:
            earliest = min(e.at for e in inbound)
            if edge.at < earliest:
                violations.append(
                    Violation(
                        "temporal_violation",
                        edge.id,
                        f"move at {edge.at} precedes first compromise of its source at {earliest}",
                    )
                )

    # Move leaves and move edges must pair bijectively.
    claimed: dict[str, str] = {}
    for target in targets:
        for leaf in sorted(target.leaves, key=lambda l: l.id):
            if leaf.kind != LeafKind.MOVE:
                if leaf.move_edge is not None:
                    violations.append(
                        Violation(
                            "malformed_leaf",
                            leaf.id,
                            "only move leaves may reference a move edge",
                        )
                    )
                continue
            edge = case.edges.get(leaf.move_edge) if leaf.move_edge else None
            if (
                edge is None
                or edge.kind != EdgeKind.MOVE
                or edge.source != leaf.target
                or leaf.move_edge in claimed
            ):
                violations.append(
                    Violation(
                        "move_leaf_unpaired",
                        leaf.id,
                        "move leaf lacks its own move edge out of this target",
                    )
                )
            else:
                claimed[leaf.move_edge] = leaf.id
    for edge in edges:
        if edge.kind == EdgeKind.MOVE and edge.id not in claimed:
            violations.append(
                Violation(
                    "move_edge_unpaired",
                    edge.id,
                    "move edge has no matching move leaf on its source target",
                )
            )

    for target in targets:
        for leaf in sorted(target.leaves, key=lambda l: l.id):
            if not is_ts(leaf.observed_from) or not is_ts(leaf.observed_to):
                violations.append(
                    Violation("invalid_interval", leaf.id, "bad interval timestamp")
                )
            elif leaf.observed_from > leaf.observed_to:
                violations.append(
                    Violation(
                        "invalid_interval",
                        leaf.id,
                        f"interval start {leaf.observed_from} is after end {leaf.observed_to}",
                    )
                )

    for edge in edges:
        for eid in edge.evidence:
            if eid not in case.evidence:
                violations.append(
                    Violation(
                        "dangling_evidence", edge.id, f"evidence {eid} is not in the vault"
                    )
                )
    for target in targets:
        for leaf in sorted(target.leaves, key=lambda l: l.id):
            for eid in leaf.evidence:
                if eid not in case.evidence:
                    violations.append(
                        Violation(
                            "dangling_evidence",
                            leaf.id,
                            f"evidence {eid} is not in the vault",
                        )
                    )
    return violations


def attack_chains(case: Case, target_id: str) -> list[list[str]]:
    """All simple paths (as edge-id lists) from the attacker to a target.

    A path may not revisit a node; parallel edges yield distinct paths.
    Result is sorted by (length, edge-id sequence).
    """
    if target_id not in case.targets:
        raise NotFound(f"unknown target {target_id}")
    adjacency: dict[str, list[EdgeEvent]] = {}
    for edge_id in sorted(case.edges):
        edge = case.edges[edge_id]
        if edge.dest in case.targets and (
            edge.source == ATTACKER or edge.source in case.targets
        ):
            adjacency.setdefault(edge.source, []).append(edge)

    paths: list[list[str]] = []

    def walk(node: str, visited: set[str], trail: list[str]) -> None:
        if node == target_id:
            paths.append(list(trail))
            return
        for edge in adjacency.get(node, ()):
            if edge.dest in visited:
                continue
            visited.add(edge.dest)
            trail.append(edge.id)
            walk(edge.dest, visited, trail)
            trail.pop()
            visited.remove(edge.dest)

    walk(ATTACKER, {ATTACKER}, [])
    paths.sort(key=lambda p: (len(p), p))
    return paths
