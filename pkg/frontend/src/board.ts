/**
 * Question-board controller, kept DOM-free so the drag rules and the 409
 * handling are testable headlessly. A drop either opens a form (collection
 * plan, hypothesis statement), submits directly (answer, withdraw), or is
 * rejected locally. Service rejections (409) surface verbatim as a toast
 * and the card snaps back - the board never moves a card itself; cards
 * move when the journal event arrives through the follower.
 */

import { Api, ApiError } from "./api.js";
import { planDrop } from "./transitions.js";
import type { QuestionState } from "./types.js";
import type { ViewModel } from "./viewmodel.js";

export interface BoardEffects {
  /** Show a transient error message (the service's own wording). */
  toast: (message: string) => void;
  /** Visually return the card to its source column. */
  snapBack: (questionId: string) => void;
  /** Ask the user for free text (collection source, hypothesis statement). */
  prompt: (label: string) => Promise<string | null>;
}

export type DropOutcome =
  | { status: "submitted" }
  | { status: "rejected"; reason: string }
  | { status: "cancelled" };

export class Board {
  constructor(
    private api: Api,
    private model: () => ViewModel,
    private effects: BoardEffects
  ) {}

  /** Columns a card in `state` may be dropped on (for hover affordances). */
  allowedColumns(questionId: string): QuestionState[] {
    const vm = this.model();
    const columns: QuestionState[] = [
      "open",
      "collecting",
      "hypothesizing",
      "answered",
      "withdrawn",
    ];
    return columns.filter((to) => planDrop(vm, questionId, to).kind !== "reject");
  }

  async drop(questionId: string, to: QuestionState): Promise<DropOutcome> {
    const vm = this.model();
    const plan = planDrop(vm, questionId, to);
    if (plan.kind === "reject") {
      this.effects.snapBack(questionId);
      this.effects.toast(plan.reason);
      return { status: "rejected", reason: plan.reason };
    }
    try {
      switch (plan.kind) {
        case "withdraw":
          await this.api.withdrawQuestion(vm.caseId, questionId, null);
          break;
        case "plan-collection": {
          const source = await this.effects.prompt("Data source to collect");
          if (source === null) return { status: "cancelled" };
          const category = await this.effects.prompt("Category (host/network/misc)");
          if (category === null) return { status: "cancelled" };
          await this.api.planCollection(vm.caseId, questionId, category || "misc", source);
          break;
        }
        case "propose-hypothesis": {
          const statement = await this.effects.prompt("Hypothesis statement");
          if (statement === null) return { status: "cancelled" };
          await this.api.proposeHypothesis(vm.caseId, questionId, statement, []);
          break;
        }
        case "answer":
          await this.api.answerQuestion(vm.caseId, questionId, plan.hypothesisId);
          break;
      }
    } catch (error) {
      if (error instanceof ApiError) {
        this.effects.snapBack(questionId);
        this.effects.toast(`${error.body.error}: ${error.body.message}`);
        return { status: "rejected", reason: error.body.error };
      }
      throw error;
    }
    // The card will move when the journal event arrives; nothing local.
    return { status: "submitted" };
  }
}
