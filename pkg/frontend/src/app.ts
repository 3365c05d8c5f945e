/** Single-page wiring: one poll loop feeding the queue, a detail pane
 * for the selected case, and a toast for decision conflicts. View state
 * is last-write-wins; whatever the service reports on the next poll
 * replaces local guesses.
 */

import {
  ApiError,
  type CaseDoc,
  type CaseSummary,
  type DecisionAction,
  type OversightApi,
} from "./api.js";
import { submitWithRollback, type CaseStateView } from "./decision.js";
import { renderDetail } from "./detail.js";
import { startPolling, type PollHandle } from "./poll.js";
import { renderQueue, renderRetryBanner } from "./queue.js";

const SERVICE_DOWN = "The oversight service is not responding.";

function toSummary(doc: CaseDoc): CaseSummary {
  return {
    id: doc.id,
    created_at: doc.created_at,
    status: doc.status,
    flagged: doc.flagged,
    system_output: doc.system_output,
    normalized_score: doc.normalized_score,
  };
}

export class App implements CaseStateView {
  private readonly api: OversightApi;
  private readonly bannerSlot: HTMLElement;
  private readonly toastSlot: HTMLElement;
  private readonly queuePane: HTMLElement;
  private readonly detailPane: HTMLElement;

  private cases: CaseSummary[] = [];
  private selectedId: string | null = null;
  private detail: CaseDoc | null = null;
  private banner: string | null = null;
  private toast: string | null = null;
  private poll: PollHandle | null = null;
  private snapshots = new Map<string, { summary: CaseSummary | null; detail: CaseDoc | null }>();

  constructor(root: HTMLElement, api: OversightApi) {
    this.api = api;

    const header = document.createElement("header");
    header.className = "topbar";
    const title = document.createElement("h1");
    title.textContent = "Oversight";
    header.appendChild(title);
    root.appendChild(header);

    this.bannerSlot = document.createElement("div");
    this.bannerSlot.className = "banner-slot";
    root.appendChild(this.bannerSlot);

    this.toastSlot = document.createElement("div");
    this.toastSlot.className = "toast-slot";
    root.appendChild(this.toastSlot);

    const layout = document.createElement("main");
    layout.className = "layout";
    this.queuePane = document.createElement("section");
    this.queuePane.className = "queue-pane";
    this.detailPane = document.createElement("section");
    this.detailPane.className = "detail-pane";
    layout.appendChild(this.queuePane);
    layout.appendChild(this.detailPane);
    root.appendChild(layout);

    this.render();
  }

  start(): void {
    this.poll = startPolling(
      () => this.tick(),
      () => {
        this.banner = SERVICE_DOWN;
        this.render();
      },
    );
  }

  stop(): void {
    this.poll?.stop();
    this.poll = null;
  }

  /** One poll: refresh the queue and, when a case is open, its detail. */
  async tick(): Promise<void> {
    const page = await this.api.listCases();
    this.cases = page.cases;
    if (this.selectedId !== null) {
      try {
        this.detail = await this.api.getCase(this.selectedId);
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          this.selectedId = null;
          this.detail = null;
        } else {
          throw err;
        }
      }
    }
    this.banner = null;
    this.render();
  }

  async select(id: string): Promise<void> {
    this.selectedId = id;
    try {
      this.detail = await this.api.getCase(id);
      this.banner = null;
    } catch {
      this.banner = SERVICE_DOWN;
    }
    this.render();
  }

  async analyze(id: string): Promise<void> {
    try {
      const doc = await this.api.analyzeCase(id);
      this.absorb(doc);
      this.banner = null;
    } catch (err) {
      if (err instanceof ApiError) {
        this.toast = err.message;
      } else {
        this.banner = SERVICE_DOWN;
      }
    }
    this.render();
  }

  async decide(id: string, action: DecisionAction, rationale: string): Promise<void> {
    const outcome = await submitWithRollback(this.api, this, id, action, rationale).catch(() => {
      this.banner = SERVICE_DOWN;
      return null;
    });
    if (outcome?.ok && outcome.doc) {
      this.absorb(outcome.doc);
      this.toast = null;
    } else if (outcome && outcome.conflict !== null) {
      this.toast = outcome.conflict;
      try {
        this.detail = await this.api.getCase(id);
      } catch {
        // the next poll will catch the detail up
      }
    }
    this.render();
  }

  markDecided(id: string): void {
    const summary = this.cases.find((c) => c.id === id) ?? null;
    this.snapshots.set(id, {
      summary: summary ? { ...summary } : null,
      detail: this.detail?.id === id ? this.detail : null,
    });
    if (summary) summary.status = "decided";
    if (this.detail?.id === id) {
      this.detail = { ...this.detail, status: "decided" };
    }
    this.render();
  }

  rollback(id: string): void {
    const snap = this.snapshots.get(id);
    if (!snap) return;
    this.snapshots.delete(id);
    if (snap.summary) {
      this.cases = this.cases.map((c) => (c.id === id ? snap.summary! : c));
    }
    if (snap.detail && this.detail?.id === id) {
      this.detail = snap.detail;
    }
    this.render();
  }

  /** Fold a fresh case document into both the queue and the detail pane. */
  private absorb(doc: CaseDoc): void {
    this.snapshots.delete(doc.id);
    this.cases = this.cases.map((c) => (c.id === doc.id ? toSummary(doc) : c));
    if (this.selectedId === doc.id) {
      this.detail = doc;
    }
  }

  render(): void {
    this.bannerSlot.replaceChildren();
    if (this.banner !== null) {
      this.bannerSlot.appendChild(renderRetryBanner(this.banner));
    }

    this.toastSlot.replaceChildren();
    if (this.toast !== null) {
      const toast = document.createElement("div");
      toast.className = "toast";
      toast.textContent = this.toast;
      toast.addEventListener("click", () => {
        this.toast = null;
        this.render();
      });
      this.toastSlot.appendChild(toast);
    }

    this.queuePane.replaceChildren(
      renderQueue(this.cases, this.selectedId, {
        onSelect: (id) => void this.select(id),
      }),
    );

    this.detailPane.replaceChildren();
    if (this.detail === null) {
      const hint = document.createElement("p");
      hint.className = "detail-placeholder";
      hint.textContent = "Select a case to review it.";
      this.detailPane.appendChild(hint);
    } else {
      this.detailPane.appendChild(
        renderDetail(this.detail, {
          onAnalyze: (id) => void this.analyze(id),
          onDecide: (id, action, rationale) =>
            void this.decide(id, action as DecisionAction, rationale),
        }),
      );
    }
  }
}
