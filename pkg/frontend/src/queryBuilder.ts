/** Compiles widget state into the service's query JSON contract.
 *
 * One widget per attribute: a value picker (eq / in) for categorical
 * attributes, a range slider for numeric ones. Attributes left untouched
 * contribute no clause, which the service treats as "any".
 */

import type { AttributeDocument, ClauseDocument, QueryDocument } from "./types.js";

export class WidgetValidationError extends Error {
  constructor(readonly attr: string, message: string) {
    super(`${attr}: ${message}`);
    this.name = "WidgetValidationError";
  }
}

export type WidgetState =
  | { kind: "untouched" }
  | { kind: "point"; value: string | number }
  | { kind: "range"; lo: number; hi: number }
  | { kind: "picks"; values: string[] };

export function pointClause(attr: string, value: string | number): ClauseDocument {
  return { attr, op: "eq", value };
}

export function rangeClause(attr: string, lo: number, hi: number): ClauseDocument {
  if (!(lo <= hi)) {
    throw new WidgetValidationError(attr, `empty range [${lo}, ${hi}]`);
  }
  return { attr, op: "range", value: [lo, hi] };
}

export function inClause(attr: string, values: string[]): ClauseDocument {
  if (values.length === 0) {
    throw new WidgetValidationError(attr, "empty value pick");
  }
  return { attr, op: "in", values: [...values] };
}

export function compileClause(
  attr: AttributeDocument,
  state: WidgetState,
): ClauseDocument | null {
  switch (state.kind) {
    case "untouched":
      return null;
    case "point":
      return pointClause(attr.name, state.value);
    case "range":
      return rangeClause(attr.name, state.lo, state.hi);
    case "picks":
      return inClause(attr.name, state.values);
  }
}

/** The full query document; widgets in attribute order, untouched ones dropped. */
export function buildQuery(
  attributes: AttributeDocument[],
  widgets: Map<string, WidgetState>,
  groupBy?: string[],
  includeZeroGroups?: boolean,
): QueryDocument {
  const clauses: ClauseDocument[] = [];
  for (const attr of attributes) {
    const state = widgets.get(attr.name) ?? { kind: "untouched" as const };
    const clause = compileClause(attr, state);
    if (clause !== null) clauses.push(clause);
  }
  const query: QueryDocument = { clauses };
  if (groupBy !== undefined && groupBy.length > 0) {
    query.groupBy = [...groupBy];
    if (includeZeroGroups !== undefined) query.includeZeroGroups = includeZeroGroups;
  }
  return query;
}
