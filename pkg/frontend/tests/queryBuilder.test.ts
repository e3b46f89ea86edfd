import { describe, expect, it } from "vitest";

import {
  WidgetValidationError,
  buildQuery,
  inClause,
  pointClause,
  rangeClause,
  type WidgetState,
} from "../src/queryBuilder.js";
import type { AttributeDocument } from "../src/types.js";

const numericA: AttributeDocument = {
  name: "A",
  kind: "numeric",
  domain: ["[0, 20)", "[20, 40)"],
  oneDStatistics: 2,
};
const categoricalB: AttributeDocument = {
  name: "B",
  kind: "categorical",
  domain: ["b1", "b2"],
  oneDStatistics: 2,
};

describe("clause compilation", () => {
  it("compiles a range slider to the exact wire clause", () => {
    expect(rangeClause("A", 36, 150)).toEqual({
      attr: "A",
      op: "range",
      value: [36, 150],
    });
  });

  it("compiles a point pick to an eq clause", () => {
    expect(pointClause("B", "b2")).toEqual({ attr: "B", op: "eq", value: "b2" });
  });

  it("compiles a multi-pick to an in clause", () => {
    expect(inClause("B", ["b1", "b2"])).toEqual({
      attr: "B",
      op: "in",
      values: ["b1", "b2"],
    });
  });

  it("rejects an empty range at the widget", () => {
    expect(() => rangeClause("A", 150, 36)).toThrow(WidgetValidationError);
  });

  it("rejects an empty pick at the widget", () => {
    expect(() => inClause("B", [])).toThrow(WidgetValidationError);
  });
});

describe("buildQuery", () => {
  it("emits an all-any query when nothing is touched", () => {
    const query = buildQuery([numericA, categoricalB], new Map());
    expect(query).toEqual({ clauses: [] });
    expect(JSON.stringify(query)).toBe('{"clauses":[]}');
  });

  it("drops untouched attributes and keeps attribute order", () => {
    const widgets = new Map<string, WidgetState>([
      ["B", { kind: "point", value: "b1" }],
      ["A", { kind: "range", lo: 36, hi: 150 }],
    ]);
    expect(buildQuery([numericA, categoricalB], widgets)).toEqual({
      clauses: [
        { attr: "A", op: "range", value: [36, 150] },
        { attr: "B", op: "eq", value: "b1" },
      ],
    });
  });

  it("adds groupBy fields only when grouping", () => {
    const grouped = buildQuery([numericA], new Map(), ["A"], false);
    expect(grouped).toEqual({ clauses: [], groupBy: ["A"], includeZeroGroups: false });
    const plain = buildQuery([numericA], new Map(), []);
    expect("groupBy" in plain).toBe(false);
  });
});
