/** Case detail: the actual input next to the monitor's synthetic
 * counterpart, with the components that meaningfully differ picked out,
 * and the decision form underneath once a verdict exists. */

import type { CaseDoc } from "./api.js";
import { formatMark, formatScore } from "./format.js";

/** Components whose absolute difference reaches this threshold get
 * highlighted. Exact-equality highlighting would light up float dust
 * the search walk leaves on unrelated components. */
export const HIGHLIGHT_THRESHOLD = 0.02;

export function componentDiff(
  actual: number[],
  synthetic: number[],
  threshold: number = HIGHLIGHT_THRESHOLD,
): boolean[] {
  const n = Math.max(actual.length, synthetic.length);
  const out: boolean[] = [];
  for (let i = 0; i < n; i++) {
    const a = actual[i] ?? 0;
    const s = synthetic[i] ?? 0;
    out.push(Math.abs(a - s) >= threshold);
  }
  return out;
}

export interface DetailHandlers {
  onAnalyze: (id: string) => void;
  onDecide: (id: string, action: string, rationale: string) => void;
}

function vectorRow(label: string, values: number[], highlights: boolean[]): HTMLElement {
  const tr = document.createElement("tr");
  const th = document.createElement("th");
  th.textContent = label;
  tr.appendChild(th);
  values.forEach((v, i) => {
    const td = document.createElement("td");
    td.textContent = formatMark(v);
    if (highlights[i]) td.className = "diff-highlight";
    tr.appendChild(td);
  });
  return tr;
}

function scoreLine(label: string, text: string): HTMLElement {
  const line = document.createElement("div");
  line.className = "score-line";
  const name = document.createElement("span");
  name.className = "score-label";
  name.textContent = label;
  const value = document.createElement("span");
  value.className = "score-value";
  value.textContent = text;
  line.appendChild(name);
  line.appendChild(value);
  return line;
}

function decisionForm(doc: CaseDoc, handlers: DetailHandlers): HTMLElement {
  const form = document.createElement("form");
  form.className = "decision-form";

  const select = document.createElement("select");
  select.className = "decision-action";
  for (const action of ["accept", "desk-reject", "escalate"]) {
    const option = document.createElement("option");
    option.value = action;
    option.textContent = action;
    select.appendChild(option);
  }
  form.appendChild(select);

  const rationale = document.createElement("input");
  rationale.className = "decision-rationale";
  rationale.placeholder = "rationale";
  form.appendChild(rationale);

  const error = document.createElement("div");
  error.className = "decision-error";
  form.appendChild(error);

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "record decision";
  form.appendChild(submit);

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const problem = validateDecision(select.value, rationale.value);
    if (problem) {
      error.textContent = problem;
      return;
    }
    error.textContent = "";
    handlers.onDecide(doc.id, select.value, rationale.value);
  });
  return form;
}

/** A rejection without a written reason is not reviewable, so it never
 * leaves the client. */
export function validateDecision(action: string, rationale: string): string | null {
  if (action === "desk-reject" && rationale.trim() === "") {
    return "a desk rejection needs a rationale";
  }
  return null;
}

export function renderDetail(doc: CaseDoc, handlers: DetailHandlers): HTMLElement {
  const root = document.createElement("div");
  root.className = "detail";

  const heading = document.createElement("h2");
  heading.textContent = doc.id;
  root.appendChild(heading);

  if (doc.verdict === null) {
    const note = document.createElement("p");
    note.className = "pending-note";
    note.textContent = "This case has not been analyzed yet.";
    root.appendChild(note);

    const analyze = document.createElement("button");
    analyze.className = "analyze-button";
    analyze.textContent = "analyze first";
    analyze.addEventListener("click", () => handlers.onAnalyze(doc.id));
    root.appendChild(analyze);
    // no decision controls without a verdict
    return root;
  }

  const verdict = doc.verdict;
  const highlights = componentDiff(doc.actual_input, verdict.counterpart.input);

  const table = document.createElement("table");
  table.className = "comparison";
  table.appendChild(vectorRow("actual", doc.actual_input, highlights));
  table.appendChild(vectorRow("synthetic", verdict.counterpart.input, highlights));
  root.appendChild(table);

  const outputs = document.createElement("div");
  outputs.className = "outputs";
  outputs.appendChild(scoreLine("actual output", formatMark(verdict.system_output)));
  outputs.appendChild(scoreLine("synthetic output", formatMark(verdict.counterpart.output)));
  root.appendChild(outputs);

  const trace = document.createElement("div");
  trace.className = "score-trace";
  trace.appendChild(scoreLine("f(dIn)", formatMark(verdict.f_of_din)));
  trace.appendChild(scoreLine("dOut", formatMark(verdict.d_out)));
  trace.appendChild(scoreLine("normalized score", formatScore(verdict.normalized_score)));
  if (verdict.maximally_unfair) {
    const warn = document.createElement("div");
    warn.className = "maximally-unfair";
    warn.textContent = "maximally unfair: the contract allows no output gap here";
    trace.appendChild(warn);
  }
  root.appendChild(trace);

  if (doc.decision !== null) {
    const decided = document.createElement("div");
    decided.className = "decision-record";
    decided.textContent = `decision: ${doc.decision.action} (${doc.decision.rationale})`;
    root.appendChild(decided);
  }
  root.appendChild(decisionForm(doc, handlers));
  return root;
}
