/** Decision submission with an optimistic local update.
 *
 * The queue marks the case decided immediately so the overseer sees the
 * effect of their click; if the service answers 409 (someone decided
 * first, or the case was never analyzed on the server's side) the local
 * state is rolled back and the conflict is surfaced. The server stays
 * authoritative: the next poll replaces whatever we guessed.
 */

import { ApiError, type CaseDoc, type DecisionAction, type OversightApi } from "./api.js";

export interface DecisionOutcome {
  ok: boolean;
  conflict: string | null;
  doc: CaseDoc | null;
}

export interface CaseStateView {
  markDecided(id: string): void;
  rollback(id: string): void;
}

export async function submitWithRollback(
  api: OversightApi,
  view: CaseStateView,
  id: string,
  action: DecisionAction,
  rationale: string,
): Promise<DecisionOutcome> {
  view.markDecided(id);
  try {
    const doc = await api.submitDecision(id, action, rationale);
    return { ok: true, conflict: null, doc };
  } catch (err) {
    view.rollback(id);
    if (err instanceof ApiError && err.status === 409) {
      return { ok: false, conflict: err.message, doc: null };
    }
    throw err;
  }
}
