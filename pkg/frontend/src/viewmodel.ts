/**
 * The view model is a pure projection of the journal: folding the event
 * stream and rebuilding from a case snapshot must land on identical state
 * (the convergence property the tests pin against engine-generated
 * fixtures). Keep every reducer branch free of I/O, clocks and randomness.
 */

import type {
  CaseSnapshot,
  CustodyEntry,
  JournalEvent,
  Question,
  TargetNode,
} from "./types.js";

export interface ViewModel {
  seq: number;
  caseId: string;
  name: string;
  openedAt: string;
  state: "open" | "closed";
  attacker: { label: string; info_gathering_notes: string | null };
  targets: Record<string, TargetNode>;
  edges: Record<string, CaseSnapshot["edges"][number]>;
  questions: Record<string, Question>;
  steps: Record<string, CaseSnapshot["collection_steps"][number]>;
  hypotheses: Record<string, CaseSnapshot["hypotheses"][number]>;
  evidence: Record<string, CaseSnapshot["evidence"][number]>;
  custody: CustodyEntry[];
  signerKeys: Record<string, string>;
  iterations: CaseSnapshot["iterations"];
  filterRuns: CaseSnapshot["filter_runs"];
  closedAt: string | null;
  closedBy: string | null;
}

export function emptyModel(): ViewModel {
  return {
    seq: 0,
    caseId: "",
    name: "",
    openedAt: "",
    state: "open",
    attacker: { label: "attacker", info_gathering_notes: null },
    targets: {},
    edges: {},
    questions: {},
    steps: {},
    hypotheses: {},
    evidence: {},
    custody: [],
    signerKeys: {},
    iterations: [],
    filterRuns: [],
    closedAt: null,
    closedBy: null,
  };
}

export function fromSnapshot(snapshot: CaseSnapshot, seq: number): ViewModel {
  const vm = emptyModel();
  vm.seq = seq;
  vm.caseId = snapshot.id;
  vm.name = snapshot.name;
  vm.openedAt = snapshot.opened_at;
  vm.state = snapshot.state;
  vm.attacker = { ...snapshot.attacker };
  for (const target of snapshot.targets) {
    vm.targets[target.id] = { ...target, leaves: target.leaves.map((l) => ({ ...l })) };
  }
  for (const edge of snapshot.edges) vm.edges[edge.id] = { ...edge };
  for (const question of snapshot.questions) vm.questions[question.id] = { ...question };
  for (const step of snapshot.collection_steps) vm.steps[step.id] = { ...step };
  for (const hypothesis of snapshot.hypotheses) {
    vm.hypotheses[hypothesis.id] = {
      ...hypothesis,
      checks: hypothesis.checks.map((c) => ({ ...c })),
    };
  }
  for (const item of snapshot.evidence) vm.evidence[item.id] = { ...item };
  vm.custody = snapshot.custody.map((entry) => ({ ...entry }));
  for (const key of snapshot.signer_keys) vm.signerKeys[key.key_id] = key.public_key;
  vm.iterations = snapshot.iterations.map((record) => ({ ...record }));
  vm.filterRuns = snapshot.filter_runs.map((run) => ({
    ...run,
    matched: [...run.matched],
  }));
  vm.closedAt = snapshot.closed_at;
  vm.closedBy = snapshot.closed_by;
  return vm;
}

function rollIteration(vm: ViewModel, at: string, trigger: string): void {
  const current = [...vm.iterations].reverse().find((record) => record.closed_at === null);
  if (current) current.closed_at = at;
  vm.iterations.push({
    seq: vm.iterations.length + 1,
    opened_at: at,
    trigger,
    closed_at: null,
  });
}

/** Fold one journal event into the model (mirrors the service reducer). */
export function applyEvent(vm: ViewModel, event: JournalEvent): ViewModel {
  const p = event.payload;
  switch (event.kind) {
    case "create_case":
      vm.caseId = p.case_id;
      vm.name = p.name;
      vm.openedAt = event.at;
      vm.state = "open";
      vm.attacker = {
        label: p.attacker_label ?? "attacker",
        info_gathering_notes: null,
      };
      vm.iterations = [
        { seq: 1, opened_at: event.at, trigger: "initial", closed_at: null },
      ];
      break;
    case "set_attacker_notes":
      vm.attacker.info_gathering_notes = p.notes;
      break;
    case "register_key":
      vm.signerKeys[p.key_id] = p.public_key;
      break;
    case "add_target":
      vm.targets[p.target_id] = {
        id: p.target_id,
        label: p.label,
        first_seen: p.first_seen,
        leaves: [],
        notes: "",
      };
      break;
    case "record_initial_compromise":
      vm.edges[p.edge_id] = {
        id: p.edge_id,
        kind: "initial_compromise",
        source: "attacker",
        dest: p.dest,
        at: p.at,
        vector: p.vector,
        evidence: [...p.evidence],
      };
      break;
    case "record_move": {
      vm.edges[p.edge_id] = {
        id: p.edge_id,
        kind: "move",
        source: p.source,
        dest: p.dest,
        at: p.at,
        vector: p.technique,
        evidence: [...p.evidence],
      };
      const destLabel = vm.targets[p.dest]?.label ?? p.dest;
      vm.targets[p.source]?.leaves.push({
        id: p.leaf_id,
        target: p.source,
        kind: "move",
        observed_from: p.at,
        observed_to: p.at,
        description: `move to ${destLabel}`,
        technique: p.technique,
        evidence: [...p.evidence],
        move_edge: p.edge_id,
      });
      break;
    }
    case "record_action":
      vm.targets[p.target]?.leaves.push({
        id: p.leaf_id,
        target: p.target,
        kind: p.kind,
        observed_from: p.observed_from,
        observed_to: p.observed_to,
        description: p.description,
        technique: p.technique ?? null,
        evidence: [...p.evidence],
        move_edge: null,
      });
      break;
    case "pose_question":
      vm.questions[p.question_id] = {
        id: p.question_id,
        scope: p.scope ?? null,
        text: p.text,
        state: "open",
        spawned_from: p.spawned_from ?? null,
        answer: null,
      };
      break;
    case "plan_collection": {
      vm.steps[p.step_id] = {
        id: p.step_id,
        question: p.question_id,
        category: p.category,
        source_description: p.source_description,
        collected: [],
        status: "planned",
      };
      const question = vm.questions[p.question_id];
      if (question && question.state === "open") question.state = "collecting";
      break;
    }
    case "attach_collected": {
      const step = vm.steps[p.step_id];
      if (step) {
        step.collected = [...p.evidence_ids];
        step.status = "done";
      }
      break;
    }
    case "run_filter":
      vm.filterRuns.push({
        at: event.at,
        actor: event.actor,
        expression: p.expression,
        matched: [...p.matched],
      });
      break;
    case "propose_hypothesis": {
      vm.hypotheses[p.hypothesis_id] = {
        id: p.hypothesis_id,
        question: p.question_id,
        statement: p.statement,
        supporting: [...p.supporting],
        state: "proposed",
        checks: [],
      };
      const question = vm.questions[p.question_id];
      if (question) question.state = "hypothesizing";
      break;
    }
    case "record_check": {
      const hypothesis = vm.hypotheses[p.hypothesis_id];
      if (!hypothesis) break;
      hypothesis.checks.push({
        id: p.check_id,
        description: p.description,
        outcome: p.outcome,
        evidence: [...p.evidence],
        at: event.at,
        actor: event.actor,
      });
      if (p.outcome === "verified") {
        hypothesis.state = "verified";
      } else {
        hypothesis.state = "refuted";
        rollIteration(vm, event.at, "hypothesis refuted");
      }
      break;
    }
    case "answer_question": {
      const question = vm.questions[p.question_id];
      if (question) {
        question.state = "answered";
        question.answer = p.hypothesis_id;
      }
      break;
    }
    case "withdraw_question": {
      const question = vm.questions[p.question_id];
      if (question) question.state = "withdrawn";
      break;
    }
    case "open_iteration":
      rollIteration(vm, event.at, p.trigger);
      break;
    case "ingest_evidence":
      vm.evidence[p.evidence_id] = {
        id: p.evidence_id,
        content_hash: p.content_hash,
        size_bytes: p.size_bytes,
        category: p.category,
        source_target: p.source_target ?? null,
        acquired_at: event.at,
        acquired_by: event.actor,
        description: p.description,
        storage_path: p.storage_path,
      };
      vm.custody.push({ ...p.custody });
      break;
    case "verify_item":
    case "custody_event":
      vm.custody.push({ ...p.custody });
      break;
    case "close_case":
      vm.state = "closed";
      vm.closedAt = event.at;
      vm.closedBy = event.actor;
      break;
    default:
      // Unknown kinds mean the client is older than the service; the
      // follower treats this as a gap and refetches.
      throw new Error(`unknown event kind ${event.kind}`);
  }
  vm.seq = event.seq;
  return vm;
}

export function foldEvents(events: JournalEvent[]): ViewModel {
  const vm = emptyModel();
  for (const event of events) applyEvent(vm, event);
  return vm;
}

const byId = (a: { id: string }, b: { id: string }) => (a.id < b.id ? -1 : a.id > b.id ? 1 : 0);

/** Canonical case form (the service's serialization) for equality checks. */
export function toCanonicalCase(vm: ViewModel): CaseSnapshot {
  return {
    id: vm.caseId,
    name: vm.name,
    opened_at: vm.openedAt,
    state: vm.state,
    attacker: { ...vm.attacker },
    targets: Object.values(vm.targets)
      .map((target) => ({ ...target, leaves: [...target.leaves].sort(byId) }))
      .sort(byId),
    edges: Object.values(vm.edges).sort(byId),
    questions: Object.values(vm.questions).sort(byId),
    collection_steps: Object.values(vm.steps).sort(byId),
    hypotheses: Object.values(vm.hypotheses)
      .map((h) => ({ ...h, checks: [...h.checks].sort(byId) }))
      .sort(byId),
    evidence: Object.values(vm.evidence).sort(byId),
    custody: vm.custody,
    signer_keys: Object.keys(vm.signerKeys)
      .sort()
      .map((keyId) => ({ key_id: keyId, public_key: vm.signerKeys[keyId] })),
    iterations: vm.iterations,
    filter_runs: vm.filterRuns,
    closed_at: vm.closedAt,
    closed_by: vm.closedBy,
  };
}

function sortKeysDeep(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(sortKeysDeep);
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as object).sort()) {
      out[key] = sortKeysDeep((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

/** Stable string form; two models are equal iff their comparable forms are. */
export function comparable(value: ViewModel | CaseSnapshot): string {
  const canonical = "caseId" in value ? toCanonicalCase(value as ViewModel) : value;
  return JSON.stringify(sortKeysDeep(canonical));
}
