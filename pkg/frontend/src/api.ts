/**
 * Typed client for the oversight service HTTP API. Every number shown
 * anywhere in the dashboard comes out of these response documents; the
 * client never recomputes a score.
 */

export type CaseStatus = "pending" | "analyzed" | "decided";

export interface CaseSummary {
  id: string;
  created_at: string;
  status: CaseStatus;
  flagged: boolean;
  system_output: number | null;
  normalized_score: number | null;
}

export interface VerdictDoc {
  system_output: number;
  score: number;
  f_of_din: number;
  d_out: number;
  normalized_score: number | null;
  maximally_unfair: boolean;
  counterpart: { input: number[]; output: number };
}

export interface DecisionDoc {
  action: string;
  rationale: string;
  decided_at: string;
}

export interface CaseDoc extends CaseSummary {
  actual_input: number[];
  verdict: VerdictDoc | null;
  decision: DecisionDoc | null;
}

export interface CasePage {
  cases: CaseSummary[];
  total: number;
  page: number;
}

export interface AuditEntry {
  sequence: number;
  timestamp: string;
  actor: string;
  event: string;
  digest: string;
  case_id: string;
}

export type DecisionAction = "accept" | "desk-reject" | "escalate";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class OversightApi {
  private readonly base: string;
  private readonly actor: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, actor = "overseer", fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.actor = actor;
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      "X-Actor": this.actor,
      ...(init?.body ? { "Content-Type": "application/json" } : {}),
    };
    const res = await this.fetchFn(`${this.base}${path}`, { ...init, headers });
    if (!res.ok) {
      let detail = `${res.status}`;
      try {
        const body = await res.json();
        if (typeof body?.detail === "string") detail = body.detail;
        else detail = JSON.stringify(body?.detail ?? body);
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  listCases(opts?: { flagged?: boolean; page?: number; status?: CaseStatus }): Promise<CasePage> {
    const params = new URLSearchParams();
    if (opts?.flagged) params.set("flagged", "true");
    if (opts?.page) params.set("page", String(opts.page));
    if (opts?.status) params.set("status", opts.status);
    const query = params.toString();
    return this.request<CasePage>(`/cases${query ? `?${query}` : ""}`);
  }

  getCase(id: string): Promise<CaseDoc> {
    return this.request<CaseDoc>(`/cases/${id}`);
  }

  ingestCase(input: number[]): Promise<CaseDoc> {
    return this.request<CaseDoc>("/cases", {
      method: "POST",
      body: JSON.stringify({ input }),
    });
  }

  analyzeCase(id: string): Promise<CaseDoc> {
    return this.request<CaseDoc>(`/cases/${id}/analyze`, { method: "POST" });
  }

  submitDecision(id: string, action: DecisionAction, rationale: string): Promise<CaseDoc> {
    return this.request<CaseDoc>(`/cases/${id}/decision`, {
      method: "POST",
      body: JSON.stringify({ action, rationale }),
    });
  }

  async audit(): Promise<AuditEntry[]> {
    const doc = await this.request<{ entries: AuditEntry[] }>("/audit");
    return doc.entries;
  }
}
