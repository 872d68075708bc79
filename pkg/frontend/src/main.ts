/** Workbench bootstrap: pick a case, build the model from a snapshot, then
 * keep it in lockstep with the journal via the long-poll follower. */

import { Api, ApiError } from "./api.js";
import { Board } from "./board.js";
import { EventFollower } from "./events.js";
import { renderBoard, renderClosure, renderGraph, renderLegend } from "./render.js";
import type { ClosureReport, QuestionState } from "./types.js";
import { applyEvent, fromSnapshot, type ViewModel } from "./viewmodel.js";

const api = new Api("");

let vm: ViewModel | null = null;
let closure: ClosureReport | null = null;

function toast(message: string): void {
  const node = document.createElement("div");
  node.className = "toast";
  node.textContent = message;
  document.body.appendChild(node);
  setTimeout(() => node.remove(), 4200);
}

const board = new Board(api, () => vm!, {
  toast,
  snapBack: () => renderAll(), // re-render from the model = card snaps home
  prompt: async (label) => window.prompt(label),
});

function renderAll(): void {
  if (!vm) return;
  document.getElementById("case-title")!.textContent = `${vm.name} (${vm.state})`;
  document.getElementById("case-seq")!.textContent = `journal seq ${vm.seq}`;
  renderGraph(vm, document.getElementById("graph-panel")!);
  renderLegend(document.getElementById("legend")!);
  renderBoard(vm, document.getElementById("board-panel")!, {
    onDragStart: () => undefined,
    onDrop: (questionId, column) => {
      void board.drop(questionId, column as QuestionState);
    },
  });
  renderClosure(closure, vm, document.getElementById("closure-panel")!);
  renderEvidence();
}

function renderEvidence(): void {
  if (!vm) return;
  const container = document.getElementById("evidence-panel")!;
  container.replaceChildren();
  for (const evidenceId of Object.keys(vm.evidence).sort()) {
    const item = vm.evidence[evidenceId];
    const row = document.createElement("div");
    row.className = "evidence-row";
    row.textContent = `${item.description} [${item.category}] ${item.content_hash.slice(0, 12)}…`;
    row.title = `${item.id}\nsha256 ${item.content_hash}\n${item.size_bytes} bytes, ${item.acquired_at} by ${item.acquired_by}`;
    container.appendChild(row);
  }
}

async function refreshClosure(caseId: string): Promise<void> {
  try {
    closure = await api.getClosure(caseId);
  } catch {
    closure = null;
  }
}

async function openCase(caseId: string): Promise<void> {
  const payload = await api.getCase(caseId);
  vm = fromSnapshot(payload.case, payload.seq);
  await refreshClosure(caseId);
  renderAll();

  const follower = new EventFollower(
    (since, wait) => api.getEvents(caseId, since, wait),
    {
      onEvent: (event) => {
        applyEvent(vm!, event);
        void refreshClosure(caseId).then(renderAll);
        renderAll();
      },
      onGap: async () => {
        const fresh = await api.getCase(caseId);
        vm = fromSnapshot(fresh.case, fresh.seq);
        await refreshClosure(caseId);
        renderAll();
        return fresh.seq;
      },
      onStale: (stale) => {
        document.getElementById("stale-badge")!.hidden = !stale;
      },
    },
    { wait: 25 },
    payload.seq
  );
  void follower.run();
}

async function bootstrap(): Promise<void> {
  const picker = document.getElementById("case-picker") as HTMLSelectElement;
  const refresh = async () => {
    const listing = await api.listCases();
    picker.replaceChildren();
    for (const row of listing.cases) {
      const option = document.createElement("option");
      option.value = row.case_id;
      option.textContent = `${row.name} (${row.state})`;
      picker.appendChild(option);
    }
  };
  await refresh();
  picker.addEventListener("change", () => void openCase(picker.value));

  document.getElementById("new-case")!.addEventListener("click", async () => {
    const name = window.prompt("Case name");
    if (!name) return;
    try {
      const created = await api.createCase(name);
      await refresh();
      picker.value = created.case_id;
      await openCase(created.case_id);
    } catch (error) {
      if (error instanceof ApiError) toast(`${error.body.error}: ${error.body.message}`);
    }
  });

  if (picker.value) await openCase(picker.value);
}

document.addEventListener("DOMContentLoaded", () => void bootstrap());
