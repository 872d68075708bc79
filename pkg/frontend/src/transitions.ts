/**
 * Question-card drag rules. The board only *initiates* operations; the
 * service remains the authority and its 409s snap the card back. A drop is
 * allowed here when some domain operation could make the move at all.
 */

import type { QuestionState } from "./types.js";
import type { ViewModel } from "./viewmodel.js";

export const BOARD_COLUMNS: QuestionState[] = [
  "open",
  "collecting",
  "hypothesizing",
  "answered",
  "withdrawn",
];

export type DropPlan =
  | { kind: "reject"; reason: string }
  | { kind: "plan-collection"; questionId: string }
  | { kind: "propose-hypothesis"; questionId: string }
  | { kind: "answer"; questionId: string; hypothesisId: string }
  | { kind: "withdraw"; questionId: string };

/** Decide what a drop onto `to` means for this card, or why it cannot. */
export function planDrop(vm: ViewModel, questionId: string, to: QuestionState): DropPlan {
  const question = vm.questions[questionId];
  if (!question) return { kind: "reject", reason: "unknown question" };
  const from = question.state;
  if (from === to) return { kind: "reject", reason: "already there" };
  if (from === "answered" || from === "withdrawn") {
    return { kind: "reject", reason: `${from} questions are immutable` };
  }
  switch (to) {
    case "withdrawn":
      return { kind: "withdraw", questionId };
    case "collecting":
      if (from !== "open") {
        return { kind: "reject", reason: "collection is planned from open questions" };
      }
      return { kind: "plan-collection", questionId };
    case "hypothesizing":
      if (from !== "collecting") {
        return { kind: "reject", reason: "hypotheses need collected data first" };
      }
      return { kind: "propose-hypothesis", questionId };
    case "answered": {
      if (from !== "hypothesizing") {
        return { kind: "reject", reason: "answering needs a hypothesis phase" };
      }
      const candidates = Object.values(vm.hypotheses).filter(
        (h) => h.question === questionId
      );
      if (candidates.length === 0) {
        return { kind: "reject", reason: "no hypothesis to answer with" };
      }
      const verified = candidates.find((h) => h.state === "verified");
      // Submit the best candidate; a non-verified one earns the service's
      // NotProven 409, which the board surfaces verbatim.
      const pick = verified ?? candidates.sort((a, b) => (a.id < b.id ? -1 : 1))[0];
      return { kind: "answer", questionId, hypothesisId: pick.id };
    }
    case "open":
      return { kind: "reject", reason: "questions never move back to open" };
    default:
      return { kind: "reject", reason: "unknown column" };
  }
}
