/** Wire types for the summary service's JSON API. */

export type ClauseOp = "eq" | "range" | "in";

export interface ClauseDocument {
  attr: string;
  op: ClauseOp;
  /** eq: one label/number; range: [lo, hi]; in: label list. */
  value?: unknown;
  values?: unknown[];
}

export interface QueryDocument {
  clauses: ClauseDocument[];
  groupBy?: string[];
  includeZeroGroups?: boolean;
}

export interface AnswerDocument {
  expectation: number;
  rounded: number;
  elapsedMs: number;
}

export interface GroupByRow extends AnswerDocument {
  group: Record<string, string>;
}

export interface GroupByDocument {
  rows: GroupByRow[];
}

export interface AttributeDocument {
  name: string;
  kind: "categorical" | "numeric";
  domain: string[];
  oneDStatistics: number;
}

export interface PairDocument {
  attributes: string[];
  statistics: number;
}

export interface SchemaDocument {
  n: number;
  attributes: AttributeDocument[];
  pairs: PairDocument[];
}

export interface SummaryListItem {
  id: string;
  name: string;
  createdAt: number;
  state: "building" | "ready" | "failed";
  n?: number;
}

export interface StatusDocument {
  id: string;
  state: "building" | "ready" | "failed";
  error?: string;
  sweeps?: number;
  converged?: boolean;
  finalResidual?: number;
  pendingDeltas?: number;
}
