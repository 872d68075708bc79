/** Wire types mirrored from the service (see docs/formats.md in the repo). */

export type LeafKind =
  | "escalate_privileges"
  | "maintain_access"
  | "information_gathering"
  | "actions_on_objective"
  | "cover_tracks"
  | "move";

export type QuestionState =
  | "open"
  | "collecting"
  | "hypothesizing"
  | "answered"
  | "withdrawn";

export type HypothesisState = "proposed" | "verified" | "refuted";

export interface ActionLeaf {
  id: string;
  target: string;
  kind: LeafKind;
  observed_from: string;
  observed_to: string;
  description: string;
  technique: string | null;
  evidence: string[];
  move_edge: string | null;
}

export interface TargetNode {
  id: string;
  label: string;
  first_seen: string;
  leaves: ActionLeaf[];
  notes: string;
}

export interface EdgeEvent {
  id: string;
  kind: "initial_compromise" | "move";
  source: string;
  dest: string;
  at: string;
  vector: string;
  evidence: string[];
}

export interface Question {
  id: string;
  scope: string | null;
  text: string;
  state: QuestionState;
  spawned_from: string | null;
  answer: string | null;
}

export interface CollectionStep {
  id: string;
  question: string;
  category: string;
  source_description: string;
  collected: string[];
  status: "planned" | "done";
}

export interface VerificationCheck {
  id: string;
  description: string;
  outcome: "verified" | "refuted";
  evidence: string[];
  at: string;
  actor: string;
}

export interface Hypothesis {
  id: string;
  question: string;
  statement: string;
  supporting: string[];
  state: HypothesisState;
  checks: VerificationCheck[];
}

export interface EvidenceItem {
  id: string;
  content_hash: string;
  size_bytes: number;
  category: string;
  source_target: string | null;
  acquired_at: string;
  acquired_by: string;
  description: string;
  storage_path: string;
}

export interface CustodyEntry {
  seq: number;
  evidence: string;
  action: string;
  actor: string;
  at: string;
  prev_hash: string;
  entry_hash: string;
  signature: string;
  signer_key_id: string;
}

export interface IterationRecord {
  seq: number;
  opened_at: string;
  trigger: string;
  closed_at: string | null;
}

export interface FilterRun {
  at: string;
  actor: string;
  expression: unknown;
  matched: string[];
}

/** Canonical case form as served by GET /cases/{id} (field `case`). */
export interface CaseSnapshot {
  id: string;
  name: string;
  opened_at: string;
  state: "open" | "closed";
  attacker: { label: string; info_gathering_notes: string | null };
  targets: TargetNode[];
  edges: EdgeEvent[];
  questions: Question[];
  collection_steps: CollectionStep[];
  hypotheses: Hypothesis[];
  evidence: EvidenceItem[];
  custody: CustodyEntry[];
  signer_keys: { key_id: string; public_key: string }[];
  iterations: IterationRecord[];
  filter_runs: FilterRun[];
  closed_at: string | null;
  closed_by: string | null;
}

export interface JournalEvent {
  seq: number;
  at: string;
  actor: string;
  kind: string;
  payload: Record<string, any>;
  prev_hash: string;
  hash: string;
}

export interface ClosureReport {
  open_questions: string[];
  unresolved_targets: string[];
  violations: { rule: string; entity: string; message: string }[];
  unsupported: { entity: string; id: string }[];
  closed_allowed: boolean;
}

export interface ServiceError {
  error: string;
  message: string;
  detail: Record<string, unknown>;
}
