"""Command layer and event reducer.

Every mutation follows the same path: validate against current state, assign
ids, append the event to the journal (write-ahead), then apply it through
the single reducer that replay also uses. Ids and timestamps live in the
payloads, so replaying a journal rebuilds byte-identical state without
regenerating anything.

The reducer (``apply_event``) must stay free of validation and of any
nondeterminism: it is the one place live execution and replay share.
"""

from __future__ import annotations

import hashlib
import os
import random
from pathlib import Path
from typing import Any, Callable, Optional

from filelock import FileLock

from . import journal as journal_mod
from .canonical import GENESIS_HASH
from .errors import (
    CaseClosed,
    ClosureBlocked,
    DanglingEvidenceRef,
    EmptyName,
    InvalidState,
    IoError,
    JournalTampered,
    Mismatch,
    NoGenesis,
    NotFound,
    NotProven,
    SelfMove,
    TemporalViolation,
    UnknownEventKind,
    UseRecordMove,
    ValidationFailed,
)
from .filters import FilterRun, FilterSpec, apply_filter
from .investigation import (
    CheckOutcome,
    ClosureReport,
    CollectionStep,
    DataSourceCategory,
    Hypothesis,
    HypothesisState,
    IterationRecord,
    Question,
    QuestionState,
    StepStatus,
    VerificationCheck,
    closure_status,
)
from .ids import IdFactory
from .journal import JournalEvent, JournalFile
from .model import (
    ATTACKER,
    ActionLeaf,
    AttackerNode,
    Case,
    CaseState,
    EdgeEvent,
    EdgeKind,
    LeafKind,
    TargetNode,
    Violation,
    attack_chains,
    validate_graph,
)
from .timestamps import format_ts, now_ts, parse_ts
from .vault import (
    BlobStore,
    ChainResult,
    CustodyAction,
    CustodyEntry,
    EvidenceItem,
    SigningKey,
    VerificationResult,
    build_custody_entry,
    recheck_item,
    verify_custody_chain,
    write_manifest,
)

SEED_ENV = "FLOWER_SEED"
SERVICE_KEY_FILENAME = "service_key.pem"


# ---------------------------------------------------------------------------
# Event reducer


def _apply_create(event: JournalEvent) -> Case:
    p = event.payload
    case = Case(id=p["case_id"], name=p["name"], opened_at=event.at)
    case.attacker = AttackerNode(label=p.get("attacker_label", "attacker"))
    case.iterations.append(IterationRecord(seq=1, opened_at=event.at, trigger="initial"))
    return case


def _apply_set_attacker_notes(case: Case, event: JournalEvent) -> None:
    case.attacker.info_gathering_notes = event.payload["notes"]


def _apply_register_key(case: Case, event: JournalEvent) -> None:
    case.signer_keys[event.payload["key_id"]] = event.payload["public_key"]


def _apply_add_target(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.targets[p["target_id"]] = TargetNode(
        id=p["target_id"], label=p["label"], first_seen=p["first_seen"]
    )


def _apply_initial_compromise(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.edges[p["edge_id"]] = EdgeEvent(
        id=p["edge_id"],
        kind=EdgeKind.INITIAL_COMPROMISE,
        source=ATTACKER,
        dest=p["dest"],
        at=p["at"],
        vector=p["vector"],
        evidence=list(p["evidence"]),
    )


def _apply_record_move(case: Case, event: JournalEvent) -> None:
    p = event.payload
    edge = EdgeEvent(
        id=p["edge_id"],
        kind=EdgeKind.MOVE,
        source=p["source"],
        dest=p["dest"],
        at=p["at"],
        vector=p["technique"],
        evidence=list(p["evidence"]),
    )
    case.edges[edge.id] = edge
    dest_label = case.targets[p["dest"]].label
    case.targets[p["source"]].leaves.append(
        ActionLeaf(
            id=p["leaf_id"],
            target=p["source"],
            kind=LeafKind.MOVE,
            observed_from=p["at"],
            observed_to=p["at"],
            description=f"move to {dest_label}",
            technique=p["technique"],
            evidence=list(p["evidence"]),
            move_edge=edge.id,
        )
    )


def _apply_record_action(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.targets[p["target"]].leaves.append(
        ActionLeaf(
            id=p["leaf_id"],
            target=p["target"],
            kind=LeafKind(p["kind"]),
            observed_from=p["observed_from"],
            observed_to=p["observed_to"],
            description=p["description"],
            technique=p.get("technique"),
            evidence=list(p["evidence"]),
        )
    )


def _apply_pose_question(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.questions[p["question_id"]] = Question(
        id=p["question_id"],
        scope=p.get("scope"),
        text=p["text"],
        spawned_from=p.get("spawned_from"),
    )


def _apply_plan_collection(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.collection_steps[p["step_id"]] = CollectionStep(
        id=p["step_id"],
        question=p["question_id"],
        category=DataSourceCategory(p["category"]),
        source_description=p["source_description"],
    )
    question = case.questions[p["question_id"]]
    if question.state == QuestionState.OPEN:
        question.state = QuestionState.COLLECTING


def _apply_attach_collected(case: Case, event: JournalEvent) -> None:
    p = event.payload
    step = case.collection_steps[p["step_id"]]
    step.collected = list(p["evidence_ids"])
    step.status = StepStatus.DONE


def _apply_run_filter(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.filter_runs.append(
        FilterRun(
            at=event.at,
            actor=event.actor,
            expression=p["expression"],
            matched=list(p["matched"]),
        )
    )


def _apply_propose_hypothesis(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.hypotheses[p["hypothesis_id"]] = Hypothesis(
        id=p["hypothesis_id"],
        question=p["question_id"],
        statement=p["statement"],
        supporting=list(p["supporting"]),
    )
    case.questions[p["question_id"]].state = QuestionState.HYPOTHESIZING


def _roll_iteration(case: Case, at: str, trigger: str) -> None:
    current = case.current_iteration()
    if current is not None:
        current.closed_at = at
    case.iterations.append(
        IterationRecord(seq=len(case.iterations) + 1, opened_at=at, trigger=trigger)
    )


def _apply_record_check(case: Case, event: JournalEvent) -> None:
    p = event.payload
    hypothesis = case.hypotheses[p["hypothesis_id"]]
    outcome = CheckOutcome(p["outcome"])
    hypothesis.checks.append(
        VerificationCheck(
            id=p["check_id"],
            description=p["description"],
            outcome=outcome,
            evidence=list(p["evidence"]),
            at=event.at,
            actor=event.actor,
        )
    )
    if outcome == CheckOutcome.VERIFIED:
        hypothesis.state = HypothesisState.VERIFIED
    else:
        hypothesis.state = HypothesisState.REFUTED
        _roll_iteration(case, event.at, "hypothesis refuted")


def _apply_answer_question(case: Case, event: JournalEvent) -> None:
    p = event.payload
    question = case.questions[p["question_id"]]
    question.state = QuestionState.ANSWERED
    question.answer = p["hypothesis_id"]


def _apply_withdraw_question(case: Case, event: JournalEvent) -> None:
    case.questions[event.payload["question_id"]].state = QuestionState.WITHDRAWN


def _apply_open_iteration(case: Case, event: JournalEvent) -> None:
    _roll_iteration(case, event.at, event.payload["trigger"])


def _apply_ingest_evidence(case: Case, event: JournalEvent) -> None:
    p = event.payload
    case.evidence[p["evidence_id"]] = EvidenceItem(
        id=p["evidence_id"],
        content_hash=p["content_hash"],
        size_bytes=p["size_bytes"],
        category=DataSourceCategory(p["category"]),
        source_target=p.get("source_target"),
        acquired_at=event.at,
        acquired_by=event.actor,
        description=p["description"],
        storage_path=p["storage_path"],
    )
    case.custody.append(CustodyEntry.from_dict(p["custody"]))


def _apply_verify_item(case: Case, event: JournalEvent) -> None:
    case.custody.append(CustodyEntry.from_dict(event.payload["custody"]))


def _apply_custody_event(case: Case, event: JournalEvent) -> None:
    case.custody.append(CustodyEntry.from_dict(event.payload["custody"]))


def _apply_close_case(case: Case, event: JournalEvent) -> None:
    case.state = CaseState.CLOSED
    case.closed_at = event.at
    case.closed_by = event.actor


_APPLY: dict[str, Callable[[Case, JournalEvent], None]] = {
    "set_attacker_notes": _apply_set_attacker_notes,
    "register_key": _apply_register_key,
    "add_target": _apply_add_target,
    "record_initial_compromise": _apply_initial_compromise,
    "record_move": _apply_record_move,
    "record_action": _apply_record_action,
    "pose_question": _apply_pose_question,
    "plan_collection": _apply_plan_collection,
    "attach_collected": _apply_attach_collected,
    "run_filter": _apply_run_filter,
    "propose_hypothesis": _apply_propose_hypothesis,
    "record_check": _apply_record_check,
    "answer_question": _apply_answer_question,
    "withdraw_question": _apply_withdraw_question,
    "open_iteration": _apply_open_iteration,
    "ingest_evidence": _apply_ingest_evidence,
    "verify_item": _apply_verify_item,
    "custody_event": _apply_custody_event,
    "close_case": _apply_close_case,
}

KNOWN_EVENT_KINDS = frozenset(_APPLY) | {"create_case"}


def apply_event(case: Case, event: JournalEvent) -> None:
    handler = _APPLY.get(event.kind)
    if handler is None:
        raise UnknownEventKind(f"unknown event kind {event.kind!r}")
    handler(case, event)


def replay_events(events: list[JournalEvent]) -> Case:
    """Rebuild case state from verified events. Deterministic by construction."""
    if not events or events[0].kind != "create_case":
        raise NoGenesis("journal has no create_case genesis event")
    case = _apply_create(events[0])
    for event in events[1:]:
        apply_event(case, event)
    return case


# ---------------------------------------------------------------------------
# Engine


def _deterministic_seed(label: str) -> random.Random:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class CaseEngine:
    """Single-writer handle on one case directory.

    Readers may hold snapshots (``case`` is refreshed, not swapped, only
    under the journal lock); concurrent writers in other processes are
    serialized by the lock file and picked up via refresh before each
    mutation validates.
    """

    def __init__(self, case_dir: str | Path, durable: bool = True):
        self.case_dir = Path(case_dir)
        self.journal = JournalFile(
            self.case_dir / journal_mod.JOURNAL_FILENAME,
            known_kinds=KNOWN_EVENT_KINDS,
            durable=durable,
        )
        self.blobs = BlobStore(self.case_dir / "vault")
        self._lock = FileLock(str(self.journal.lock_path))
        self._ids = self._make_id_factory()
        self._applied_seq = 0
        self.case: Optional[Case] = None
        # Test seam: runs after an event is persisted, before it is applied.
        self.post_persist_hook: Optional[Callable[[JournalEvent], None]] = None

    # -- construction -------------------------------------------------------

    def _make_id_factory(self) -> IdFactory:
        seed = os.environ.get(SEED_ENV)
        if seed is not None:
            rng = _deterministic_seed(f"{seed}:{self.case_dir.name}")
            return IdFactory(clock=lambda: 0.0, rng=rng)
        return IdFactory()

    @classmethod
    def create(
        cls,
        case_dir: str | Path,
        name: str,
        opened_at: str,
        actor: str,
        attacker_label: str = "attacker",
        durable: bool = True,
        case_id: str | None = None,
    ) -> "CaseEngine":
        if not name:
            raise EmptyName("case name must not be empty")
        parse_ts(opened_at)
        case_dir = Path(case_dir)
        engine = cls(case_dir, durable=durable)
        if engine.journal.exists():
            raise IoError(f"case directory {case_dir} already has a journal")
        case_dir.mkdir(parents=True, exist_ok=True)
        with engine._lock:
            cid = case_id or engine._ids.new_id()
            payload = {"case_id": cid, "name": name, "attacker_label": attacker_label}
            event = engine.journal.append("create_case", payload, actor, opened_at)
            if engine.post_persist_hook:
                engine.post_persist_hook(event)
            engine.case = _apply_create(event)
            engine._applied_seq = 1
            engine._ids.observe(cid)
        return engine

    @classmethod
    def open(cls, case_dir: str | Path, durable: bool = True) -> "CaseEngine":
        engine = cls(case_dir, durable=durable)
        if not engine.journal.exists():
            raise NotFound(f"no case journal in {case_dir}")
        with engine._lock:
            engine._reload()
        return engine

    def _reload(self) -> None:
        events = self.journal.read_events()
        result = journal_mod.verify_events(events)
        if not result.ok:
            raise JournalTampered(
                f"journal broken at seq {result.break_seq} ({result.reason})",
                {"seq": result.break_seq, "reason": result.reason},
            )
        self.case = replay_events(events)
        self._applied_seq = events[-1].seq if events else 0
        self._observe_ids()

    def _observe_ids(self) -> None:
        case = self.case
        assert case is not None
        self._ids.observe(case.id)
        for collection in (
            case.targets,
            case.edges,
            case.questions,
            case.collection_steps,
            case.hypotheses,
            case.evidence,
        ):
            for entity_id in collection:
                self._ids.observe(entity_id)
        for target in case.targets.values():
            for leaf in target.leaves:
                self._ids.observe(leaf.id)
        for hypothesis in case.hypotheses.values():
            for check in hypothesis.checks:
                self._ids.observe(check.id)

    def refresh(self) -> Case:
        """Catch up with events other writers appended since we last looked."""
        with self._lock:
            self._refresh_locked()
        assert self.case is not None
        return self.case

    def _refresh_locked(self) -> None:
        if self.case is None:
            self._reload()
            return
        tail_seq, _ = self.journal.tail()
        if tail_seq < self._applied_seq:
            # Shorter file than memory: someone truncated; rebuild from disk.
            self._reload()
            return
        if tail_seq > self._applied_seq:
            for event in self.journal.read_since(self._applied_seq):
                apply_event(self.case, event)
                self._applied_seq = event.seq
            self._observe_ids()

    # -- mutation plumbing ---------------------------------------------------

    def _default_at(self) -> str:
        if os.environ.get(SEED_ENV) is not None:
            import datetime

            base = datetime.datetime(2001, 1, 1, tzinfo=datetime.timezone.utc)
            return format_ts(base + datetime.timedelta(seconds=self._applied_seq + 1))
        return now_ts()

    def _mutate(
        self,
        kind: str,
        build: Callable[[Case], dict[str, Any]],
        actor: str,
        at: str | None,
    ) -> JournalEvent:
        with self._lock:
            self._refresh_locked()
            case = self.case
            assert case is not None
            at = at if at is not None else self._default_at()
            parse_ts(at)
            payload = build(case)
            event = self.journal.append(kind, payload, actor, at)
            if self.post_persist_hook:
                self.post_persist_hook(event)
            apply_event(case, event)
            self._applied_seq = event.seq
            return event

    def _require_open(self, case: Case) -> None:
        if not case.is_open():
            raise CaseClosed(f"case {case.id} is closed")

    def _require_evidence(self, case: Case, evidence_ids: list[str]) -> None:
        for eid in evidence_ids:
            if eid not in case.evidence:
                raise DanglingEvidenceRef(f"evidence {eid} is not in the vault")

    # -- case-model operations ----------------------------------------------

    def set_attacker_notes(self, notes: str, actor: str = "analyst", at: str | None = None) -> None:
        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            return {"notes": notes}

        self._mutate("set_attacker_notes", build, actor, at)

    def add_target(
        self, label: str, first_seen: str, actor: str = "analyst", at: str | None = None
    ) -> TargetNode:
        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            if not label:
                raise EmptyName("target label must not be empty")
            parse_ts(first_seen)
            return {"target_id": self._ids.new_id(), "label": label, "first_seen": first_seen}

        event = self._mutate("add_target", build, actor, at)
        return self.case.targets[event.payload["target_id"]]

    def record_initial_compromise(
        self,
        dest: str,
        at_event: str,
        vector: str,
        evidence: list[str] | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> EdgeEvent:
        evidence = list(evidence or [])

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            if dest not in case.targets:
                raise NotFound(f"unknown target {dest}")
            parse_ts(at_event)
            self._require_evidence(case, evidence)
            return {
                "edge_id": self._ids.new_id(),
                "dest": dest,
                "at": at_event,
                "vector": vector,
                "evidence": evidence,
            }

        event = self._mutate("record_initial_compromise", build, actor, at)
        return self.case.edges[event.payload["edge_id"]]

    def record_move(
        self,
        source: str,
        dest: str,
        at_event: str,
        technique: str,
        evidence: list[str] | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> tuple[EdgeEvent, ActionLeaf]:
        evidence = list(evidence or [])

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            if source == dest:
                raise SelfMove("a move needs two distinct targets")
            for tid in (source, dest):
                if tid not in case.targets:
                    raise NotFound(f"unknown target {tid}")
            parse_ts(at_event)
            inbound = case.inbound_edges(source)
            if not inbound:
                raise TemporalViolation(
                    f"target {source} has no inbound edge; it cannot be a move source yet"
                )
            earliest = min(e.at for e in inbound)
            if at_event < earliest:
                raise TemporalViolation(
                    f"move at {at_event} precedes first compromise of {source} at {earliest}"
                )
            self._require_evidence(case, evidence)
            return {
                "edge_id": self._ids.new_id(),
                "leaf_id": self._ids.new_id(),
                "source": source,
                "dest": dest,
                "at": at_event,
                "technique": technique,
                "evidence": evidence,
            }

        event = self._mutate("record_move", build, actor, at)
        edge = self.case.edges[event.payload["edge_id"]]
        leaf = self.case.find_leaf(event.payload["leaf_id"])
        return edge, leaf

    def record_action(
        self,
        target: str,
        kind: LeafKind | str,
        observed_from: str,
        observed_to: str,
        description: str,
        technique: str | None = None,
        evidence: list[str] | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> ActionLeaf:
        evidence = list(evidence or [])
        try:
            leaf_kind = LeafKind(kind)
        except ValueError:
            raise ValidationFailed(f"unknown leaf kind: {kind!r}") from None

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            if leaf_kind == LeafKind.MOVE:
                raise UseRecordMove("move leaves are created by record_move")
            if target not in case.targets:
                raise NotFound(f"unknown target {target}")
            parse_ts(observed_from)
            parse_ts(observed_to)
            if observed_from > observed_to:
                raise ValidationFailed(
                    f"interval start {observed_from} is after end {observed_to}"
                )
            self._require_evidence(case, evidence)
            return {
                "leaf_id": self._ids.new_id(),
                "target": target,
                "kind": leaf_kind.value,
                "observed_from": observed_from,
                "observed_to": observed_to,
                "description": description,
                "technique": technique,
                "evidence": evidence,
            }

        event = self._mutate("record_action", build, actor, at)
        return self.case.find_leaf(event.payload["leaf_id"])

    # -- investigation workflow operations ------------------------------------

    def pose_question(
        self,
        text: str,
        scope: str | None = None,
        spawned_from: str | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> Question:
        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            if not text:
                raise EmptyName("question text must not be empty")
            if scope is not None and scope not in case.targets:
                raise NotFound(f"unknown target {scope}")
            if spawned_from is not None and spawned_from not in case.hypotheses:
                raise NotFound(f"unknown hypothesis {spawned_from}")
            return {
                "question_id": self._ids.new_id(),
                "scope": scope,
                "text": text,
                "spawned_from": spawned_from,
            }

        event = self._mutate("pose_question", build, actor, at)
        return self.case.questions[event.payload["question_id"]]

    def plan_collection(
        self,
        question_id: str,
        category: DataSourceCategory | str,
        source_description: str,
        actor: str = "analyst",
        at: str | None = None,
    ) -> CollectionStep:
        try:
            cat = DataSourceCategory(category)
        except ValueError:
            raise ValidationFailed(f"unknown category: {category!r}") from None

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            question = case.questions.get(question_id)
            if question is None:
                raise NotFound(f"unknown question {question_id}")
            if question.state not in (
                QuestionState.OPEN,
                QuestionState.COLLECTING,
                QuestionState.HYPOTHESIZING,
            ):
                raise InvalidState(
                    f"cannot plan collection for a question in state {question.state.value}"
                )
            return {
                "step_id": self._ids.new_id(),
                "question_id": question_id,
                "category": cat.value,
                "source_description": source_description,
            }

        event = self._mutate("plan_collection", build, actor, at)
        return self.case.collection_steps[event.payload["step_id"]]

    def attach_collected(
        self,
        step_id: str,
        evidence_ids: list[str],
        actor: str = "analyst",
        at: str | None = None,
    ) -> CollectionStep:
        evidence_ids = list(evidence_ids)

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            step = case.collection_steps.get(step_id)
            if step is None:
                raise NotFound(f"unknown collection step {step_id}")
            if step.status != StepStatus.PLANNED:
                raise InvalidState("collection step is already done")
            self._require_evidence(case, evidence_ids)
            return {"step_id": step_id, "evidence_ids": evidence_ids}

        self._mutate("attach_collected", build, actor, at)
        return self.case.collection_steps[step_id]

    def run_filter(
        self,
        expression: dict[str, Any],
        actor: str = "analyst",
        at: str | None = None,
    ) -> list[str]:
        spec = FilterSpec.parse(expression)

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            return {"expression": spec.to_dict(), "matched": apply_filter(case, spec)}

        event = self._mutate("run_filter", build, actor, at)
        return list(event.payload["matched"])

    def propose_hypothesis(
        self,
        question_id: str,
        statement: str,
        supporting: list[str] | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> Hypothesis:
        supporting = list(supporting or [])

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            question = case.questions.get(question_id)
            if question is None:
                raise NotFound(f"unknown question {question_id}")
            if question.state not in (QuestionState.COLLECTING, QuestionState.HYPOTHESIZING):
                raise InvalidState(
                    "hypotheses need collected data: plan a collection step first"
                )
            if not statement:
                raise EmptyName("hypothesis statement must not be empty")
            self._require_evidence(case, supporting)
            return {
                "hypothesis_id": self._ids.new_id(),
                "question_id": question_id,
                "statement": statement,
                "supporting": supporting,
            }

        event = self._mutate("propose_hypothesis", build, actor, at)
        return self.case.hypotheses[event.payload["hypothesis_id"]]

    def record_check(
        self,
        hypothesis_id: str,
        description: str,
        outcome: CheckOutcome | str,
        evidence: list[str] | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> VerificationCheck:
        evidence = list(evidence or [])
        try:
            parsed_outcome = CheckOutcome(outcome)
        except ValueError:
            raise ValidationFailed(f"unknown check outcome: {outcome!r}") from None

        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            hypothesis = case.hypotheses.get(hypothesis_id)
            if hypothesis is None:
                raise NotFound(f"unknown hypothesis {hypothesis_id}")
            if hypothesis.state != HypothesisState.PROPOSED:
                raise InvalidState(
                    f"hypothesis is already {hypothesis.state.value}; outcomes are immutable"
                )
            if parsed_outcome == CheckOutcome.VERIFIED and not hypothesis.supporting:
                raise InvalidState(
                    "cannot verify a hypothesis with no supporting evidence"
                )
            self._require_evidence(case, evidence)
            return {
                "check_id": self._ids.new_id(),
                "hypothesis_id": hypothesis_id,
                "description": description,
                "outcome": parsed_outcome.value,
                "evidence": evidence,
            }

        event = self._mutate("record_check", build, actor, at)
        hypothesis = self.case.hypotheses[hypothesis_id]
        return hypothesis.checks[-1]

    def answer_question(
        self,
        question_id: str,
        hypothesis_id: str,
        actor: str = "analyst",
        at: str | None = None,
    ) -> Question:
        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            question = case.questions.get(question_id)
            if question is None:
                raise NotFound(f"unknown question {question_id}")
            hypothesis = case.hypotheses.get(hypothesis_id)
            if hypothesis is None:
                raise NotFound(f"unknown hypothesis {hypothesis_id}")
            if hypothesis.question != question_id:
                raise Mismatch("hypothesis answers a different question")
            if hypothesis.state != HypothesisState.VERIFIED:
                raise NotProven(
                    f"hypothesis is {hypothesis.state.value}; only verified hypotheses answer questions"
                )
            if question.state != QuestionState.HYPOTHESIZING:
                raise InvalidState(
                    f"question in state {question.state.value} cannot be answered"
                )
            return {"question_id": question_id, "hypothesis_id": hypothesis_id}

        self._mutate("answer_question", build, actor, at)
        return self.case.questions[question_id]

    def withdraw_question(
        self,
        question_id: str,
        reason: str | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> Question:
        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            question = case.questions.get(question_id)
            if question is None:
                raise NotFound(f"unknown question {question_id}")
            if question.state in (QuestionState.ANSWERED, QuestionState.WITHDRAWN):
                raise InvalidState(
                    f"question in state {question.state.value} cannot be withdrawn"
                )
            return {"question_id": question_id, "reason": reason}

        self._mutate("withdraw_question", build, actor, at)
        return self.case.questions[question_id]

    def open_iteration(
        self, trigger: str, actor: str = "analyst", at: str | None = None
    ) -> IterationRecord:
        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            if trigger not in ("new evidence", "new question"):
                raise ValidationFailed(
                    "explicit iterations are triggered by 'new evidence' or 'new question'"
                )
            return {"trigger": trigger}

        self._mutate("open_iteration", build, actor, at)
        return self.case.iterations[-1]

    # -- vault operations ------------------------------------------------------

    def _ensure_key_registered(self, key: SigningKey, actor: str, at: str | None) -> None:
        case = self.case
        assert case is not None
        registered = case.signer_keys.get(key.key_id)
        if registered == key.public_key_b64:
            return
        if registered is not None:
            raise ValidationFailed(
                f"key id {key.key_id!r} is already registered with a different public key"
            )

        def build(inner: Case) -> dict[str, Any]:
            self._require_open(inner)
            return {"key_id": key.key_id, "public_key": key.public_key_b64}

        self._mutate("register_key", build, actor, at)

    def _next_custody(
        self, case: Case, evidence_id: str, action: CustodyAction, actor: str, at: str, key: SigningKey
    ) -> CustodyEntry:
        prev_hash = case.custody[-1].entry_hash if case.custody else GENESIS_HASH
        return build_custody_entry(
            seq=len(case.custody) + 1,
            evidence=evidence_id,
            action=action,
            actor=actor,
            at=at,
            prev_hash=prev_hash,
            key=key,
        )

    def ingest_evidence(
        self,
        data: bytes,
        category: DataSourceCategory | str,
        description: str,
        key: SigningKey,
        source_target: str | None = None,
        actor: str = "analyst",
        at: str | None = None,
    ) -> tuple[EvidenceItem, CustodyEntry]:
        try:
            cat = DataSourceCategory(category)
        except ValueError:
            raise ValidationFailed(f"unknown category: {category!r}") from None
        with self._lock:
            self._refresh_locked()
            case = self.case
            assert case is not None
            self._require_open(case)
            if source_target is not None and source_target not in case.targets:
                raise NotFound(f"unknown target {source_target}")
            at = at if at is not None else self._default_at()
            parse_ts(at)
            self._ensure_key_registered(key, actor, at)
            content_hash, rel_path = self.blobs.put(data)
            evidence_id = self._ids.new_id()
            custody = self._next_custody(
                case, evidence_id, CustodyAction.INGESTED, actor, at, key
            )
            payload = {
                "evidence_id": evidence_id,
                "content_hash": content_hash,
                "size_bytes": len(data),
                "category": cat.value,
                "source_target": source_target,
                "description": description,
                "storage_path": rel_path,
                "custody": custody.to_dict(),
            }
            event = self.journal.append("ingest_evidence", payload, actor, at)
            if self.post_persist_hook:
                self.post_persist_hook(event)
            apply_event(case, event)
            self._applied_seq = event.seq
            return case.evidence[evidence_id], case.custody[-1]

    def verify_item(
        self,
        evidence_id: str,
        key: SigningKey,
        actor: str = "analyst",
        at: str | None = None,
    ) -> VerificationResult:
        with self._lock:
            self._refresh_locked()
            case = self.case
            assert case is not None
            self._require_open(case)
            item = case.evidence.get(evidence_id)
            if item is None:
                raise NotFound(f"unknown evidence {evidence_id}")
            result = recheck_item(item, self.blobs)  # raises BlobMissing
            at = at if at is not None else self._default_at()
            parse_ts(at)
            self._ensure_key_registered(key, actor, at)
            custody = self._next_custody(
                case, evidence_id, CustodyAction.VERIFIED, actor, at, key
            )
            payload = {
                "evidence_id": evidence_id,
                "status": result.status,
                "expected": result.expected,
                "actual": result.actual,
                "custody": custody.to_dict(),
            }
            event = self.journal.append("verify_item", payload, actor, at)
            if self.post_persist_hook:
                self.post_persist_hook(event)
            apply_event(case, event)
            self._applied_seq = event.seq
            return result

    def record_custody_event(
        self,
        evidence_id: str,
        action: CustodyAction | str,
        key: SigningKey,
        actor: str = "analyst",
        at: str | None = None,
    ) -> CustodyEntry:
        try:
            act = CustodyAction(action)
        except ValueError:
            raise ValidationFailed(f"unknown custody action: {action!r}") from None
        if act not in (CustodyAction.ACCESSED, CustodyAction.EXPORTED):
            raise ValidationFailed("only accessed/exported entries are recorded this way")

        with self._lock:
            self._refresh_locked()
            case = self.case
            assert case is not None
            self._require_open(case)
            if evidence_id not in case.evidence:
                raise NotFound(f"unknown evidence {evidence_id}")
            at = at if at is not None else self._default_at()
            parse_ts(at)
            self._ensure_key_registered(key, actor, at)
            custody = self._next_custody(case, evidence_id, act, actor, at, key)
            payload = {
                "evidence_id": evidence_id,
                "action": act.value,
                "custody": custody.to_dict(),
            }
            event = self.journal.append("custody_event", payload, actor, at)
            if self.post_persist_hook:
                self.post_persist_hook(event)
            apply_event(case, event)
            self._applied_seq = event.seq
            return case.custody[-1]

    def open_evidence(self, evidence_id: str) -> bytes:
        """Read-only blob access (no custody entry; see record_custody_event)."""
        case = self.case
        assert case is not None
        item = case.evidence.get(evidence_id)
        if item is None:
            raise NotFound(f"unknown evidence {evidence_id}")
        return self.blobs.read(item.content_hash)

    def verify_chain(self) -> ChainResult:
        assert self.case is not None
        return verify_custody_chain(self.case.custody, self.case.signer_keys)

    def export_manifest(self, directory: str | Path | None = None) -> Path:
        assert self.case is not None
        return write_manifest(self.case, directory or self.case_dir)

    # -- lifecycle -------------------------------------------------------------

    def closure_status(self) -> ClosureReport:
        assert self.case is not None
        return closure_status(self.case)

    def close_case(self, actor: str = "analyst", at: str | None = None) -> Case:
        def build(case: Case) -> dict[str, Any]:
            self._require_open(case)
            report = closure_status(case)
            if not report.closed_allowed:
                raise ClosureBlocked(
                    "case cannot close: open questions, unresolved origins or graph violations remain",
                    report.to_dict(),
                )
            return {}

        self._mutate("close_case", build, actor, at)
        return self.case

    # -- read-only views ---------------------------------------------------------

    def validate_graph(self) -> list[Violation]:
        assert self.case is not None
        return validate_graph(self.case)

    def attack_chains(self, target_id: str) -> list[list[str]]:
        assert self.case is not None
        return attack_chains(self.case, target_id)

    def apply_filter(self, expression: dict[str, Any]) -> list[str]:
        assert self.case is not None
        return apply_filter(self.case, expression)

    def state_digest(self) -> str:
        assert self.case is not None
        return journal_mod.state_digest(self.case)


class CaseStore:
    """Directory of cases: one subdirectory per case id under the root."""

    def __init__(self, root: str | Path, durable: bool = True):
        self.root = Path(root)
        self.durable = durable

    def case_dir(self, case_id: str) -> Path:
        return self.root / case_id

    def create_case(
        self,
        name: str,
        opened_at: str | None = None,
        actor: str = "analyst",
        attacker_label: str = "attacker",
    ) -> CaseEngine:
        if not name:
            raise EmptyName("case name must not be empty")
        self.root.mkdir(parents=True, exist_ok=True)
        # The case id names the directory, so it is generated before the
        # engine exists; under FLOWER_SEED it derives from the case name.
        seed = os.environ.get(SEED_ENV)
        if seed is not None:
            ids = IdFactory(clock=lambda: 0.0, rng=_deterministic_seed(f"{seed}:{name}"))
        else:
            ids = IdFactory()
        case_id = ids.new_id()
        case_dir = self.case_dir(case_id)
        if case_dir.exists():
            raise IoError(f"case directory {case_dir} already exists")
        if opened_at is None:
            opened_at = "2001-01-01T00:00:01Z" if seed is not None else now_ts()
        return CaseEngine.create(
            case_dir,
            name,
            opened_at,
            actor,
            attacker_label=attacker_label,
            durable=self.durable,
            case_id=case_id,
        )

    def open_case(self, case_id: str) -> CaseEngine:
        case_dir = self.case_dir(case_id)
        if not (case_dir / journal_mod.JOURNAL_FILENAME).exists():
            raise NotFound(f"unknown case {case_id}")
        return CaseEngine.open(case_dir, durable=self.durable)

    def list_case_ids(self) -> list[str]:
        if not self.root.exists():
            return []
        return sorted(
            p.name
            for p in self.root.iterdir()
            if (p / journal_mod.JOURNAL_FILENAME).exists()
        )

    def resolve_case(self, ref: str) -> str:
        """Resolve a case id, or a unique case name, to the case id."""
        ids = self.list_case_ids()
        if ref in ids:
            return ref
        matches = []
        for cid in ids:
            try:
                engine = self.open_case(cid)
            except JournalTampered:
                continue
            if engine.case.name == ref:
                matches.append(cid)
        if len(matches) == 1:
            return matches[0]
        if not matches:
            raise NotFound(f"unknown case {ref}")
        raise ValidationFailed(f"case name {ref!r} is ambiguous: {matches}")

    def service_key(self) -> SigningKey:
        """The default signing key for this store, created on first use."""
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / SERVICE_KEY_FILENAME
        if path.exists():
            return SigningKey.load_pem(path, key_id="service")
        seed_env = os.environ.get(SEED_ENV)
        seed = (
            hashlib.sha256(f"flower-seed-{seed_env}".encode("utf-8")).digest()
            if seed_env is not None
            else None
        )
        key = SigningKey.generate(key_id="service", seed=seed)
        key.save_pem(path)
        return key
