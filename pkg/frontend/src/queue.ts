/** The case queue: a polled list with flagged cases pinned on top. */

import type { CaseSummary } from "./api.js";
import { formatScore } from "./format.js";

/** Flagged cases come first; within each group the server's own
 * ordering (creation time) is preserved. */
export function orderForQueue(cases: CaseSummary[]): CaseSummary[] {
  const flagged = cases.filter((c) => c.flagged);
  const rest = cases.filter((c) => !c.flagged);
  return [...flagged, ...rest];
}

export interface QueueHandlers {
  onSelect: (id: string) => void;
}

function statusBadge(c: CaseSummary): HTMLElement {
  const badge = document.createElement("span");
  badge.className = `badge badge-${c.status}`;
  if (c.status === "pending") {
    badge.textContent = "analysis in progress";
  } else if (c.status === "decided") {
    badge.textContent = "decided";
  } else {
    badge.textContent = "analyzed";
  }
  return badge;
}

export function renderQueue(
  cases: CaseSummary[],
  selectedId: string | null,
  handlers: QueueHandlers,
): HTMLElement {
  const root = document.createElement("div");
  root.className = "queue";

  if (cases.length === 0) {
    const empty = document.createElement("div");
    empty.className = "empty-state";
    empty.textContent = "No cases yet. Ingested cases will appear here.";
    root.appendChild(empty);
    return root;
  }

  const list = document.createElement("ul");
  list.className = "queue-list";
  for (const c of orderForQueue(cases)) {
    const row = document.createElement("li");
    row.className = "queue-row";
    if (c.flagged) row.className += " flagged";
    if (c.id === selectedId) row.className += " selected";
    row.dataset.caseId = c.id;

    const id = document.createElement("span");
    id.className = "case-id";
    id.textContent = c.id;
    row.appendChild(id);

    const score = document.createElement("span");
    score.className = "score";
    score.textContent = formatScore(c.normalized_score);
    row.appendChild(score);

    row.appendChild(statusBadge(c));

    row.addEventListener("click", () => handlers.onSelect(c.id));
    list.appendChild(row);
  }
  root.appendChild(list);
  return root;
}

/** Banner shown while the service is unreachable; polling keeps
 * retrying underneath it. */
export function renderRetryBanner(message: string): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "retry-banner";
  banner.textContent = `${message} Retrying automatically.`;
  return banner;
}
