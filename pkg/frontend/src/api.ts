/** Typed client for the case service. The UI never mutates state locally:
 * every change is a POST here, and the view updates from the event feed. */

import type { CaseSnapshot, ClosureReport, JournalEvent, ServiceError } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ServiceError
  ) {
    super(`${body.error}: ${body.message}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : {};
    if (!response.ok) {
      throw new ApiError(response.status, parsed as ServiceError);
    }
    return parsed as T;
  }

  listCases(): Promise<{ cases: { case_id: string; name: string; state: string }[] }> {
    return this.request("GET", "/cases");
  }

  getCase(caseId: string): Promise<{ case: CaseSnapshot; seq: number }> {
    return this.request("GET", `/cases/${caseId}`);
  }

  getClosure(caseId: string): Promise<ClosureReport> {
    return this.request("GET", `/cases/${caseId}/closure`);
  }

  getEvents(
    caseId: string,
    since: number,
    wait = 25
  ): Promise<{ events: JournalEvent[]; seq: number }> {
    return this.request("GET", `/cases/${caseId}/events?since=${since}&wait=${wait}`);
  }

  createCase(name: string): Promise<{ case_id: string; seq: number }> {
    return this.request("POST", "/cases", { name });
  }

  addTarget(caseId: string, label: string, firstSeen: string) {
    return this.request<{ target_id: string; seq: number }>(
      "POST",
      `/cases/${caseId}/targets`,
      { label, first_seen: firstSeen }
    );
  }

  addEdge(caseId: string, body: Record<string, unknown>) {
    return this.request<{ edge_id: string; seq: number }>(
      "POST",
      `/cases/${caseId}/edges`,
      body
    );
  }

  addAction(caseId: string, body: Record<string, unknown>) {
    return this.request<{ leaf_id: string; seq: number }>(
      "POST",
      `/cases/${caseId}/actions`,
      body
    );
  }

  poseQuestion(caseId: string, text: string, scope: string | null) {
    return this.request<{ question_id: string; seq: number }>(
      "POST",
      `/cases/${caseId}/questions`,
      { text, scope }
    );
  }

  planCollection(caseId: string, questionId: string, category: string, source: string) {
    return this.request<{ step_id: string; seq: number }>(
      "POST",
      `/cases/${caseId}/collection-steps`,
      { question: questionId, category, source_description: source }
    );
  }

  attachCollected(caseId: string, stepId: string, evidence: string[]) {
    return this.request<{ step_id: string; seq: number }>(
      "POST",
      `/cases/${caseId}/collection-steps/${stepId}/attach`,
      { evidence }
    );
  }

  proposeHypothesis(caseId: string, questionId: string, statement: string, supporting: string[]) {
    return this.request<{ hypothesis_id: string; seq: number }>(
      "POST",
      `/cases/${caseId}/hypotheses`,
      { question: questionId, statement, supporting }
    );
  }

  recordCheck(
    caseId: string,
    hypothesisId: string,
    description: string,
    outcome: "verified" | "refuted",
    evidence: string[]
  ) {
    return this.request<{ check_id: string; hypothesis_state: string; seq: number }>(
      "POST",
      `/cases/${caseId}/hypotheses/${hypothesisId}/checks`,
      { description, outcome, evidence }
    );
  }

  answerQuestion(caseId: string, questionId: string, hypothesisId: string) {
    return this.request<{ question_id: string; state: string; seq: number }>(
      "POST",
      `/cases/${caseId}/questions/${questionId}/answer`,
      { hypothesis: hypothesisId }
    );
  }

  withdrawQuestion(caseId: string, questionId: string, reason: string | null) {
    return this.request<{ question_id: string; state: string; seq: number }>(
      "POST",
      `/cases/${caseId}/questions/${questionId}/withdraw`,
      { reason }
    );
  }

  closeCase(caseId: string) {
    return this.request<{ case_id: string; state: string; seq: number }>(
      "POST",
      `/cases/${caseId}/close`,
      {}
    );
  }

  async uploadEvidence(
    caseId: string,
    file: File,
    category: string,
    description: string,
    sourceTarget: string | null
  ): Promise<{ evidence_id: string; content_hash: string; seq: number }> {
    const form = new FormData();
    form.append("file", file);
    form.append("case_id", caseId);
    form.append("category", category);
    form.append("description", description);
    if (sourceTarget) form.append("source_target", sourceTarget);
    const response = await this.fetchImpl(this.base + "/evidence", {
      method: "POST",
      body: form,
    });
    const parsed = await response.json();
    if (!response.ok) throw new ApiError(response.status, parsed as ServiceError);
    return parsed;
  }
}
