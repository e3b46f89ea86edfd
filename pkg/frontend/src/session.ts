/** Per-tab exploration state: summary choice, predicate draft, history. */

import type { AnswerDocument, QueryDocument } from "./types.js";
import type { WidgetState } from "./queryBuilder.js";

export interface HistoryEntry {
  query: QueryDocument;
  expectation: number;
  rounded: number;
  elapsedMs: number;
  at: number;
}

export class ExplorerSession {
  summaryId: string | null = null;
  readonly widgets = new Map<string, WidgetState>();
  compareExact = false;
  private readonly entries: HistoryEntry[] = [];

  get history(): readonly HistoryEntry[] {
    return this.entries;
  }

  record(query: QueryDocument, answer: AnswerDocument, now: number = Date.now()): void {
    // Append-only: past entries are never mutated or removed.
    this.entries.push({
      query: JSON.parse(JSON.stringify(query)) as QueryDocument,
      expectation: answer.expectation,
      rounded: answer.rounded,
      elapsedMs: answer.elapsedMs,
      at: now,
    });
  }

  selectSummary(id: string): void {
    this.summaryId = id;
    this.widgets.clear();
  }
}
