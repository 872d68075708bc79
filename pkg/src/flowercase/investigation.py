"""Investigation workflow entities and the closure predicate.

Questions drive everything: collection steps exist only against a posed
question, hypotheses answer questions, verification checks settle
hypotheses, and a case can close only when every non-withdrawn question is
answered and every target's origin is proven. Iteration records make the
re-iteration loop (refuted hypothesis, new evidence, new question)
reportable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Optional

from .errors import ValidationFailed

if TYPE_CHECKING:  # pragma: no cover
    from .model import Case, Violation


class QuestionState(str, Enum):
    OPEN = "open"
    COLLECTING = "collecting"
    HYPOTHESIZING = "hypothesizing"
    ANSWERED = "answered"
    WITHDRAWN = "withdrawn"


# Forward transitions; withdrawal is additionally legal from any non-answered
# state. Answered and withdrawn are terminal.
QUESTION_TRANSITIONS: dict[QuestionState, set[QuestionState]] = {
    QuestionState.OPEN: {QuestionState.COLLECTING, QuestionState.WITHDRAWN},
    QuestionState.COLLECTING: {QuestionState.HYPOTHESIZING, QuestionState.WITHDRAWN},
    QuestionState.HYPOTHESIZING: {QuestionState.ANSWERED, QuestionState.WITHDRAWN},
    QuestionState.ANSWERED: set(),
    QuestionState.WITHDRAWN: set(),
}


class HypothesisState(str, Enum):
    PROPOSED = "proposed"
    VERIFIED = "verified"
    REFUTED = "refuted"


HYPOTHESIS_TRANSITIONS: dict[HypothesisState, set[HypothesisState]] = {
    HypothesisState.PROPOSED: {HypothesisState.VERIFIED, HypothesisState.REFUTED},
    HypothesisState.VERIFIED: set(),
    HypothesisState.REFUTED: set(),
}


class DataSourceCategory(str, Enum):
    HOST = "host"
    NETWORK = "network"
    MISC = "misc"


class StepStatus(str, Enum):
    PLANNED = "planned"
    DONE = "done"


class CheckOutcome(str, Enum):
    VERIFIED = "verified"
    REFUTED = "refuted"


ITERATION_TRIGGERS = ("initial", "hypothesis refuted", "new evidence", "new question")


def _enum(kind: type, value: Any, what: str):
    try:
        return kind(value)
    except ValueError:
        raise ValidationFailed(f"unknown {what}: {value!r}") from None


@dataclass
class Question:
    """A question posed about the case or one target (scope None = case-wide)."""

    id: str
    scope: Optional[str]
    text: str
    state: QuestionState = QuestionState.OPEN
    spawned_from: Optional[str] = None
    answer: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "scope": self.scope,
            "text": self.text,
            "state": self.state.value,
            "spawned_from": self.spawned_from,
            "answer": self.answer,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Question":
        return cls(
            id=data["id"],
            scope=data.get("scope"),
            text=data["text"],
            state=_enum(QuestionState, data["state"], "question state"),
            spawned_from=data.get("spawned_from"),
            answer=data.get("answer"),
        )


@dataclass
class CollectionStep:
    """A planned data-source collection serving exactly one question."""

    id: str
    question: str
    category: DataSourceCategory
    source_description: str
    collected: list[str] = field(default_factory=list)
    status: StepStatus = StepStatus.PLANNED

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "question": self.question,
            "category": self.category.value,
            "source_description": self.source_description,
            "collected": list(self.collected),
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CollectionStep":
        return cls(
            id=data["id"],
            question=data["question"],
            category=_enum(DataSourceCategory, data["category"], "category"),
            source_description=data["source_description"],
            collected=list(data.get("collected", [])),
            status=_enum(StepStatus, data["status"], "step status"),
        )


@dataclass
class VerificationCheck:
    """An audit action against a hypothesis; outcome is immutable once recorded."""

    id: str
    description: str
    outcome: CheckOutcome
    evidence: list[str]
    at: str
    actor: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "description": self.description,
            "outcome": self.outcome.value,
            "evidence": list(self.evidence),
            "at": self.at,
            "actor": self.actor,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "VerificationCheck":
        return cls(
            id=data["id"],
            description=data["description"],
            outcome=_enum(CheckOutcome, data["outcome"], "check outcome"),
            evidence=list(data.get("evidence", [])),
            at=data["at"],
            actor=data["actor"],
        )


@dataclass
class Hypothesis:
    id: str
    question: str
    statement: str
    supporting: list[str] = field(default_factory=list)
    state: HypothesisState = HypothesisState.PROPOSED
    checks: list[VerificationCheck] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "question": self.question,
            "statement": self.statement,
            "supporting": list(self.supporting),
            "state": self.state.value,
            "checks": [c.to_dict() for c in self.checks],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Hypothesis":
        return cls(
            id=data["id"],
            question=data["question"],
            statement=data["statement"],
            supporting=list(data.get("supporting", [])),
            state=_enum(HypothesisState, data["state"], "hypothesis state"),
            checks=[VerificationCheck.from_dict(c) for c in data.get("checks", [])],
        )


@dataclass
class IterationRecord:
    """One pass of the investigation loop. At most one is open per case."""

    seq: int
    opened_at: str
    trigger: str
    closed_at: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "opened_at": self.opened_at,
            "trigger": self.trigger,
            "closed_at": self.closed_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "IterationRecord":
        return cls(
            seq=data["seq"],
            opened_at=data["opened_at"],
            trigger=data["trigger"],
            closed_at=data.get("closed_at"),
        )


@dataclass
class ClosureReport:
    """What still blocks closing the case, plus non-blocking evidence warnings."""

    open_questions: list[str]
    unresolved_targets: list[str]
    violations: list["Violation"]
    unsupported: list[dict[str, str]]
    closed_allowed: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "open_questions": list(self.open_questions),
            "unresolved_targets": list(self.unresolved_targets),
            "violations": [v.to_dict() for v in self.violations],
            "unsupported": [dict(w) for w in self.unsupported],
            "closed_allowed": self.closed_allowed,
        }


def origin_resolved(case: "Case", target_id: str) -> bool:
    """True when the target's origin is proven.

    Proven means: some inbound edge exists whose evidence intersects the
    supporting evidence of the verified hypothesis that answered a question
    scoped to this target.
    """
    inbound = [e for e in case.edges.values() if e.dest == target_id]
    if not inbound:
        return False
    answered = [
        q
        for q in case.questions.values()
        if q.scope == target_id and q.state == QuestionState.ANSWERED and q.answer
    ]
    for edge in inbound:
        edge_evidence = set(edge.evidence)
        if not edge_evidence:
            continue
        for question in answered:
            hypothesis = case.hypotheses.get(question.answer)
            if hypothesis and edge_evidence & set(hypothesis.supporting):
                return True
    return False


def closure_status(case: "Case") -> ClosureReport:
    """Evaluate the closure predicate; never raises."""
    from .model import validate_graph

    open_questions = sorted(
        q.id
        for q in case.questions.values()
        if q.state not in (QuestionState.ANSWERED, QuestionState.WITHDRAWN)
    )
    unresolved = sorted(
        t for t in case.targets if not origin_resolved(case, t)
    )
    violations = validate_graph(case)
    unsupported: list[dict[str, str]] = []
    for edge in sorted(case.edges.values(), key=lambda e: e.id):
        if not edge.evidence:
            unsupported.append({"entity": "edge", "id": edge.id})
    for target in sorted(case.targets.values(), key=lambda t: t.id):
        for leaf in sorted(target.leaves, key=lambda l: l.id):
            if not leaf.evidence:
                unsupported.append({"entity": "leaf", "id": leaf.id})
    return ClosureReport(
        open_questions=open_questions,
        unresolved_targets=unresolved,
        violations=violations,
        unsupported=unsupported,
        closed_allowed=not (open_questions or unresolved or violations),
    )
