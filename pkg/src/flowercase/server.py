"""JSON-over-HTTP service for the investigator workbench.

A thin adapter with the same journal semantics as the CLI: mutations go
through the engine (and its lock) per request, reads replay from disk, and
the event feed long-polls the journal file so UI updates reflect writes made
by any process. Every mutation response carries the new journal seq as the
client's resync anchor. Domain errors map to 400/404/409 with a JSON body.
"""

from __future__ import annotations

import asyncio
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .engine import CaseEngine, CaseStore
from .errors import CONFLICT_CODES, DomainError, NotFound
from .report import export_dot, generate_report
from .timestamps import now_ts


class CaseBody(BaseModel):
    name: str
    opened_at: Optional[str] = None
    actor: str = "analyst"


class TargetBody(BaseModel):
    label: str
    first_seen: str
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class EdgeBody(BaseModel):
    kind: str  # "initial_compromise" | "move"
    dest: str
    at: str
    source: Optional[str] = None
    vector: Optional[str] = None
    technique: Optional[str] = None
    evidence: list[str] = []
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class ActionBody(BaseModel):
    target: str
    kind: str
    observed_from: str
    observed_to: str
    description: str
    technique: Optional[str] = None
    evidence: list[str] = []
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class QuestionBody(BaseModel):
    text: str
    scope: Optional[str] = None
    spawned_from: Optional[str] = None
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class AnswerBody(BaseModel):
    hypothesis: str
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class WithdrawBody(BaseModel):
    reason: Optional[str] = None
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class StepBody(BaseModel):
    question: str
    category: str
    source_description: str
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class AttachBody(BaseModel):
    evidence: list[str] = []
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class HypothesisBody(BaseModel):
    question: str
    statement: str
    supporting: list[str] = []
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class CheckBody(BaseModel):
    description: str
    outcome: str
    evidence: list[str] = []
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class FilterBody(BaseModel):
    expression: dict[str, Any]
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class CloseBody(BaseModel):
    actor: str = "analyst"
    recorded_at: Optional[str] = None


class IterationBody(BaseModel):
    trigger: str
    actor: str = "analyst"
    recorded_at: Optional[str] = None


def _status_for(exc: DomainError) -> int:
    if exc.code == "NotFound":
        return 404
    if exc.code in CONFLICT_CODES:
        return 409
    return 400


def create_app(case_root: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="flowercase service", version="0.1.0")
    store = CaseStore(case_root)

    @app.exception_handler(DomainError)
    async def domain_error_handler(request: Request, exc: DomainError) -> JSONResponse:
        return JSONResponse(
            status_code=_status_for(exc),
            content={"error": exc.code, "message": exc.message, "detail": exc.detail},
        )

    def engine_for(case_id: str) -> CaseEngine:
        return store.open_case(case_id)

    def seq_of(engine: CaseEngine) -> int:
        seq, _ = engine.journal.tail()
        return seq

    # -- cases ------------------------------------------------------------

    @app.post("/cases", status_code=201)
    def create_case(body: CaseBody) -> dict[str, Any]:
        engine = store.create_case(body.name, opened_at=body.opened_at, actor=body.actor)
        return {"case_id": engine.case.id, "seq": 1}

    @app.get("/cases")
    def list_cases() -> dict[str, Any]:
        rows = []
        for cid in store.list_case_ids():
            engine = engine_for(cid)
            rows.append(
                {"case_id": cid, "name": engine.case.name, "state": engine.case.state.value}
            )
        return {"cases": rows}

    @app.get("/cases/{case_id}")
    def get_case(case_id: str) -> dict[str, Any]:
        engine = engine_for(case_id)
        return {"case": engine.case.to_dict(), "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/close")
    def close_case(case_id: str, body: CloseBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        engine.close_case(actor=body.actor, at=body.recorded_at)
        return {"case_id": case_id, "state": "closed", "seq": seq_of(engine)}

    @app.get("/cases/{case_id}/closure")
    def closure(case_id: str) -> dict[str, Any]:
        engine = engine_for(case_id)
        return engine.closure_status().to_dict()

    # -- graph ------------------------------------------------------------

    @app.post("/cases/{case_id}/targets", status_code=201)
    def add_target(case_id: str, body: TargetBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        node = engine.add_target(body.label, body.first_seen, actor=body.actor, at=body.recorded_at)
        return {"target_id": node.id, "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/edges", status_code=201)
    def add_edge(case_id: str, body: EdgeBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        if body.kind == "initial_compromise":
            edge = engine.record_initial_compromise(
                body.dest,
                body.at,
                body.vector or "",
                body.evidence,
                actor=body.actor,
                at=body.recorded_at,
            )
            return {"edge_id": edge.id, "seq": seq_of(engine)}
        if body.kind == "move":
            if body.source is None:
                raise NotFound("move edges need a source target")
            edge, leaf = engine.record_move(
                body.source,
                body.dest,
                body.at,
                body.technique or "",
                body.evidence,
                actor=body.actor,
                at=body.recorded_at,
            )
            return {"edge_id": edge.id, "leaf_id": leaf.id, "seq": seq_of(engine)}
        raise DomainError(f"unknown edge kind {body.kind!r}")

    @app.post("/cases/{case_id}/actions", status_code=201)
    def add_action(case_id: str, body: ActionBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        leaf = engine.record_action(
            body.target,
            body.kind,
            body.observed_from,
            body.observed_to,
            body.description,
            technique=body.technique,
            evidence=body.evidence,
            actor=body.actor,
            at=body.recorded_at,
        )
        return {"leaf_id": leaf.id, "seq": seq_of(engine)}

    # -- investigation workflow ---------------------------------------------

    @app.post("/cases/{case_id}/questions", status_code=201)
    def pose_question(case_id: str, body: QuestionBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        q = engine.pose_question(
            body.text, scope=body.scope, spawned_from=body.spawned_from,
            actor=body.actor, at=body.recorded_at,
        )
        return {"question_id": q.id, "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/questions/{question_id}/answer")
    def answer_question(case_id: str, question_id: str, body: AnswerBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        q = engine.answer_question(question_id, body.hypothesis, actor=body.actor, at=body.recorded_at)
        return {"question_id": q.id, "state": q.state.value, "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/questions/{question_id}/withdraw")
    def withdraw_question(case_id: str, question_id: str, body: WithdrawBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        q = engine.withdraw_question(question_id, reason=body.reason, actor=body.actor, at=body.recorded_at)
        return {"question_id": q.id, "state": q.state.value, "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/collection-steps", status_code=201)
    def plan_collection(case_id: str, body: StepBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        step = engine.plan_collection(
            body.question, body.category, body.source_description,
            actor=body.actor, at=body.recorded_at,
        )
        return {"step_id": step.id, "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/collection-steps/{step_id}/attach")
    def attach_collected(case_id: str, step_id: str, body: AttachBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        step = engine.attach_collected(step_id, body.evidence, actor=body.actor, at=body.recorded_at)
        return {"step_id": step.id, "status": step.status.value, "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/hypotheses", status_code=201)
    def propose_hypothesis(case_id: str, body: HypothesisBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        h = engine.propose_hypothesis(
            body.question, body.statement, body.supporting,
            actor=body.actor, at=body.recorded_at,
        )
        return {"hypothesis_id": h.id, "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/hypotheses/{hypothesis_id}/checks", status_code=201)
    def record_check_scoped(case_id: str, hypothesis_id: str, body: CheckBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        check = engine.record_check(
            hypothesis_id, body.description, body.outcome, body.evidence,
            actor=body.actor, at=body.recorded_at,
        )
        state = engine.case.hypotheses[hypothesis_id].state.value
        return {"check_id": check.id, "hypothesis_state": state, "seq": seq_of(engine)}

    @app.post("/hypotheses/{hypothesis_id}/checks", status_code=201)
    def record_check(hypothesis_id: str, body: CheckBody) -> dict[str, Any]:
        # The hypothesis id is unique across the store; find its case.
        for cid in store.list_case_ids():
            engine = engine_for(cid)
            if hypothesis_id in engine.case.hypotheses:
                return record_check_scoped(cid, hypothesis_id, body)
        raise NotFound(f"unknown hypothesis {hypothesis_id}")

    @app.post("/cases/{case_id}/filters")
    def run_filter(case_id: str, body: FilterBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        matched = engine.run_filter(body.expression, actor=body.actor, at=body.recorded_at)
        return {"matched": matched, "count": len(matched), "seq": seq_of(engine)}

    @app.post("/cases/{case_id}/iterations", status_code=201)
    def open_iteration(case_id: str, body: IterationBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        record = engine.open_iteration(body.trigger, actor=body.actor, at=body.recorded_at)
        return {"iteration_seq": record.seq, "seq": seq_of(engine)}

    # -- evidence --------------------------------------------------------------

    @app.post("/evidence", status_code=201)
    async def ingest_evidence(
        file: UploadFile = File(...),
        case_id: str = Form(...),
        category: str = Form(...),
        description: str = Form(""),
        source_target: Optional[str] = Form(None),
        actor: str = Form("analyst"),
        recorded_at: Optional[str] = Form(None),
    ) -> dict[str, Any]:
        data = await file.read()
        engine = engine_for(case_id)
        key = store.service_key()
        item, entry = engine.ingest_evidence(
            data,
            category,
            description or (file.filename or ""),
            key,
            source_target=source_target,
            actor=actor,
            at=recorded_at,
        )
        return {
            "evidence_id": item.id,
            "content_hash": item.content_hash,
            "size_bytes": item.size_bytes,
            "custody_seq": entry.seq,
            "seq": seq_of(engine),
        }

    @app.post("/cases/{case_id}/evidence/{evidence_id}/verify")
    def verify_evidence(case_id: str, evidence_id: str, body: CloseBody) -> dict[str, Any]:
        engine = engine_for(case_id)
        key = store.service_key()
        result = engine.verify_item(evidence_id, key, actor=body.actor, at=body.recorded_at)
        payload = result.to_dict()
        payload["seq"] = seq_of(engine)
        return payload

    @app.get("/cases/{case_id}/custody")
    def custody_chain(case_id: str) -> dict[str, Any]:
        engine = engine_for(case_id)
        return {
            "entries": [entry.to_dict() for entry in engine.case.custody],
            "result": engine.verify_chain().to_dict(),
        }

    # -- outputs -----------------------------------------------------------------

    @app.get("/cases/{case_id}/graph.dot", response_class=PlainTextResponse)
    def graph_dot(case_id: str) -> PlainTextResponse:
        engine = engine_for(case_id)
        return PlainTextResponse(export_dot(engine.case), media_type="text/vnd.graphviz")

    @app.get("/cases/{case_id}/report.md", response_class=PlainTextResponse)
    def report_md(case_id: str, generated_at: Optional[str] = None) -> PlainTextResponse:
        engine = engine_for(case_id)
        if generated_at is None:
            events = engine.journal.read_events()
            generated_at = events[-1].at if events else now_ts()
        return PlainTextResponse(
            generate_report(engine.case, generated_at), media_type="text/markdown"
        )

    @app.get("/cases/{case_id}/events")
    async def events(case_id: str, since: int = 0, wait: float = 0.0) -> dict[str, Any]:
        """Journal events after ``since``; long-polls up to ``wait`` seconds."""
        if not (store.case_dir(case_id) / "journal.jsonl").exists():
            raise NotFound(f"unknown case {case_id}")
        journal = CaseEngine(store.case_dir(case_id)).journal
        deadline = asyncio.get_event_loop().time() + min(wait, 60.0)
        while True:
            fresh = journal.read_since(since)
            if fresh or asyncio.get_event_loop().time() >= deadline:
                seq, _ = journal.tail()
                return {"events": [e.to_dict() for e in fresh], "seq": seq}
            await asyncio.sleep(0.2)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def run_server(
    case_root: str | Path, host: str, port: int, ui_dir: str | Path | None = None
) -> None:
    import uvicorn

    uvicorn.run(create_app(case_root, ui_dir=ui_dir), host=host, port=port, log_level="info")
