/** Estimate-vs-exact badge, sharing the evaluation kit's error formula. */

export function relativeError(exact: number, estimate: number): number {
  if (exact + estimate === 0) return 0;
  return Math.abs(exact - estimate) / (exact + estimate);
}

export interface CompareBadge {
  exact: number;
  estimate: number;
  relativeError: number;
  label: string;
}

export function compareBadge(exact: number, estimate: number): CompareBadge {
  const err = relativeError(exact, estimate);
  return {
    exact,
    estimate,
    relativeError: err,
    label: err === 0 ? "exact" : `±${(err * 100).toFixed(1)}%`,
  };
}
