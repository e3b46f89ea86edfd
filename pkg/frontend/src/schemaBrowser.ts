/** Schema panel view model: attributes, domains, and 2D coverage badges.
 *
 * Pairs carrying 2D statistics are where estimates track correlations;
 * surfacing them tells the analyst which drill-downs to trust most.
 */

import type { SchemaDocument } from "./types.js";

export interface AttributeView {
  name: string;
  kind: string;
  domainSize: number;
  domainPreview: string[];
  oneDStatistics: number;
  /** Names of partner attributes this one shares 2D statistics with. */
  pairedWith: string[];
}

export interface SchemaView {
  n: number;
  attributes: AttributeView[];
  pairs: { label: string; statistics: number }[];
}

const PREVIEW_LIMIT = 8;

export function schemaView(doc: SchemaDocument): SchemaView {
  const partners = new Map<string, string[]>();
  for (const pair of doc.pairs) {
    for (const name of pair.attributes) {
      const others = pair.attributes.filter((a) => a !== name);
      partners.set(name, [...(partners.get(name) ?? []), ...others]);
    }
  }
  return {
    n: doc.n,
    attributes: doc.attributes.map((attr) => ({
      name: attr.name,
      kind: attr.kind,
      domainSize: attr.domain.length,
      domainPreview: attr.domain.slice(0, PREVIEW_LIMIT),
      oneDStatistics: attr.oneDStatistics,
      pairedWith: partners.get(attr.name) ?? [],
    })),
    pairs: doc.pairs.map((pair) => ({
      label: pair.attributes.join(" × "),
      statistics: pair.statistics,
    })),
  };
}
