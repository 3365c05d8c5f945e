/** Display helpers. Values come straight from the API; the only thing
 * done here is formatting. */

/** Normalized scores render with exactly three decimals; a missing
 * value (pending analysis, or a maximally unfair verdict whose
 * normalized score is unbounded) renders as "n/a". */
export function formatScore(value: number | null | undefined): string {
  if (value === null || value === undefined) return "n/a";
  return value.toFixed(3);
}

export function formatMark(value: number): string {
  return value.toFixed(4);
}
