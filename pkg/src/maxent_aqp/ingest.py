"""CSV ingestion, 1D count statistics, and pairwise contingency matrices."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    AttributeMeta,
    BucketizerSpec,
    Clause,
    ConfigError,
    Dataset,
    Predicate,
    Schema,
    Statistic,
    bucketize_value,
    numeric_bucket_labels,
)


@dataclass(frozen=True)
class ContingencyMatrix:
    """Pairwise value-frequency matrix for one attribute pair.

    Permutations map display/matrix position -> original domain index; they
    start as identities and are only changed by seriation.
    """

    pair: tuple  # (attr1, attr2)
    matrix: np.ndarray
    row_perm: np.ndarray
    col_perm: np.ndarray

    @staticmethod
    def from_counts(pair, matrix) -> "ContingencyMatrix":
        m = np.asarray(matrix, dtype=float)
        return ContingencyMatrix(
            pair, m, np.arange(m.shape[0]), np.arange(m.shape[1])
        )

    def permuted(self, row_perm, col_perm) -> "ContingencyMatrix":
        row_perm = np.asarray(row_perm)
        col_perm = np.asarray(col_perm)
        return ContingencyMatrix(
            self.pair,
            self.matrix[np.ix_(row_perm, col_perm)],
            self.row_perm[row_perm],
            self.col_perm[col_perm],
        )


def _build_attribute(name, spec: BucketizerSpec, domain, raw_column) -> AttributeMeta:
    if spec.kind == "numeric":
        return AttributeMeta(name, "numeric", spec, numeric_bucket_labels(spec))
    if domain is None:
        # Infer the categorical domain from the data: sorted unique labels,
        # optionally reduced to the top_k most frequent plus an overflow bucket.
        labels, counts = np.unique(np.asarray(raw_column, dtype=object), return_counts=True)
        if spec.top_k is not None and len(labels) > spec.top_k:
            if spec.overflow_label is None:
                spec = replace(spec, overflow_label="Other")
            order = sorted(range(len(labels)), key=lambda i: (-counts[i], labels[i]))
            kept = sorted(labels[i] for i in order[: spec.top_k])
            domain = tuple(kept) + (spec.overflow_label,)
        else:
            domain = tuple(labels)
    elif spec.overflow_label is not None and spec.overflow_label not in domain:
        domain = tuple(domain) + (spec.overflow_label,)
    return AttributeMeta(name, "categorical", spec, tuple(domain))


def load_csv(path, schema_config) -> Dataset:
    """Load a comma-separated file and bucketize it against the schema config.

    `schema_config` is the parsed form: [(name, BucketizerSpec, domain|None)].
    Rows with missing or unparseable cells are dropped and counted; numeric
    values outside the configured range clamp into edge buckets (counted).
    """
    names = [name for name, _, _ in schema_config]
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            header = names
        missing = [c for c in names if c not in header]
        if missing:
            raise ConfigError(f"CSV is missing columns {missing}")
        col_idx = [header.index(c) for c in names]
        raw_rows = []
        dropped = 0
        for row in reader:
            if len(row) < len(header):
                dropped += 1
                continue
            cells = [row[i] for i in col_idx]
            if any(c == "" for c in cells):
                dropped += 1
                continue
            raw_rows.append(cells)

    # Numeric parse check before domain inference so bad rows never pollute it.
    parsed_rows = []
    for cells in raw_rows:
        ok = True
        for (name, spec, _), cell in zip(schema_config, cells):
            if spec.kind == "numeric":
                try:
                    float(cell)
                except ValueError:
                    ok = False
                    break
        if ok:
            parsed_rows.append(cells)
        else:
            dropped += 1

    columns = list(zip(*parsed_rows)) if parsed_rows else [[] for _ in names]
    attrs = [
        _build_attribute(name, spec, domain, columns[i])
        for i, (name, spec, domain) in enumerate(schema_config)
    ]
    schema = Schema(tuple(attrs))

    clamped = 0
    table = np.zeros((len(parsed_rows), len(attrs)), dtype=np.int64)
    for r, cells in enumerate(parsed_rows):
        for c, (meta, cell) in enumerate(zip(attrs, cells)):
            if meta.kind == "numeric":
                x = float(cell)
                if not (meta.bucketizer.lo <= x <= meta.bucketizer.hi):
                    clamped += 1
                table[r, c] = bucketize_value(meta, cell if meta.kind != "numeric" else x)
            else:
                table[r, c] = bucketize_value(meta, cell)
    return Dataset(schema, table, dropped_rows=dropped, clamped_values=clamped)


def one_d_counts(ds: Dataset, attr: str) -> np.ndarray:
    meta = ds.schema.attribute(attr)
    col = ds.table[:, ds.schema.index_of(attr)]
    return np.bincount(col, minlength=meta.size).astype(float)


def compute_1d_statistics(ds: Dataset, start_id: int = 0) -> list:
    """One point statistic per (attribute, value), targets = exact counts."""
    stats = []
    sid = start_id
    for meta in ds.schema:
        counts = one_d_counts(ds, meta.name)
        for v in range(meta.size):
            pred = Predicate.of(**{meta.name: Clause.point(v)})
            stats.append(Statistic(sid, pred, float(counts[v])))
            sid += 1
    return stats


def contingency_matrix(ds: Dataset, attr1: str, attr2: str) -> ContingencyMatrix:
    if attr1 == attr2:
        raise ValueError("contingency matrix needs two distinct attributes")
    n1 = ds.schema.attribute(attr1).size
    n2 = ds.schema.attribute(attr2).size
    c1 = ds.table[:, ds.schema.index_of(attr1)]
    c2 = ds.table[:, ds.schema.index_of(attr2)]
    flat = np.bincount(c1 * n2 + c2, minlength=n1 * n2)
    return ContingencyMatrix.from_counts((attr1, attr2), flat.reshape(n1, n2))


def chi_squared(cm: ContingencyMatrix) -> float:
    """Pearson chi-squared against the independence expectation.

    Cells whose expected count is 0 (degenerate marginals) contribute 0,
    and an empty matrix scores 0.
    """
    m = cm.matrix
    n = m.sum()
    if n == 0:
        return 0.0
    expected = np.outer(m.sum(axis=1), m.sum(axis=0)) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (m - expected) ** 2 / np.where(expected > 0, expected, 1), 0.0)
    return float(terms.sum())


def statistics_dump(stats, schema: Schema) -> dict:
    """JSON-ready audit listing of every statistic (labels, not indices)."""
    out = []
    for st in stats:
        clauses = {}
        for attr, cl in st.predicate.clauses:
            meta = schema.attribute(attr)
            idx = sorted(cl.indices(meta.size))
            clauses[attr] = [meta.domain[i] for i in idx]
        out.append(
            {
                "id": st.id,
                "kind": "1d" if st.is_1d else f"{len(st.attrs)}d",
                "attributes": list(st.attrs),
                "values": clauses,
                "target": st.target,
            }
        )
    return {"statistics": out}


def dump_statistics_json(stats, schema, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(statistics_dump(stats, schema), fh, indent=2)
