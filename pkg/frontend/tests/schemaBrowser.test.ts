import { describe, expect, it } from "vitest";

import { schemaView } from "../src/schemaBrowser.js";
import type { SchemaDocument } from "../src/types.js";

import schemaFixture from "./fixtures/schema.json";

const schema = schemaFixture as SchemaDocument;

describe("schemaView", () => {
  const view = schemaView(schema);

  it("passes statistic counts through unchanged", () => {
    expect(view.n).toBe(schema.n);
    for (let i = 0; i < schema.attributes.length; i++) {
      expect(view.attributes[i].oneDStatistics).toBe(
        schema.attributes[i].oneDStatistics,
      );
    }
    expect(view.pairs.map((p) => p.statistics)).toEqual(
      schema.pairs.map((p) => p.statistics),
    );
  });

  it("badges every attribute carrying 2D statistics", () => {
    const byName = new Map(view.attributes.map((a) => [a.name, a]));
    expect(byName.get("A")?.pairedWith).toEqual(["B"]);
    expect(byName.get("B")?.pairedWith).toEqual(["A", "C"]);
    expect(byName.get("C")?.pairedWith).toEqual(["B"]);
  });

  it("labels pairs for display", () => {
    expect(view.pairs.map((p) => p.label)).toEqual(["A × B", "B × C"]);
  });

  it("handles an empty registry's schema-less state", () => {
    const empty = schemaView({ n: 0, attributes: [], pairs: [] });
    expect(empty.attributes).toEqual([]);
    expect(empty.pairs).toEqual([]);
  });
});
