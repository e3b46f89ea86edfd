"""Summary document format (JSON), version 1.

The document carries the schema, every statistic (predicate as value labels,
target, solved alpha), the factorization as a flat node table, and solve
diagnostics. Alphas survive a round-trip bit-exactly: JSON float output uses
repr, which is shortest-exact for IEEE doubles.
"""

from __future__ import annotations

import json

import numpy as np

from .core import (
    AttributeMeta,
    BucketizerSpec,
    Clause,
    Predicate,
    Schema,
    Statistic,
    StatisticSet,
)
from .polynomial import (
    CORRECTION,
    PRODUCT,
    SUM,
    VAR,
    CompressedPolynomial,
    PolyNode,
)
from .solver import SolveDiagnostics, Summary

FORMAT_VERSION = 1


class SerializationError(ValueError):
    pass


def _clause_to_doc(cl: Clause, meta: AttributeMeta) -> dict:
    if cl.kind == "point":
        return {"kind": "point", "values": [meta.domain[cl.lo]]}
    if cl.kind == "range":
        return {"kind": "range", "values": [meta.domain[cl.lo], meta.domain[cl.hi]]}
    if cl.kind == "set":
        return {"kind": "set", "values": [meta.domain[i] for i in sorted(cl.members)]}
    return {"kind": "any", "values": []}


def _clause_from_doc(doc: dict, meta: AttributeMeta) -> Clause:
    kind = doc["kind"]
    if kind == "point":
        return Clause.point(meta.label_index(doc["values"][0]))
    if kind == "range":
        lo, hi = doc["values"]
        return Clause.range(meta.label_index(lo), meta.label_index(hi))
    if kind == "set":
        return Clause.of(meta.label_index(v) for v in doc["values"])
    if kind == "any":
        return Clause.any_()
    raise SerializationError(f"unknown clause kind {kind!r}")


def _schema_to_doc(schema: Schema) -> dict:
    out = []
    for meta in schema:
        spec = meta.bucketizer
        out.append(
            {
                "name": meta.name,
                "kind": meta.kind,
                "domain": list(meta.domain),
                "bucketizer": {
                    "kind": spec.kind,
                    "lo": spec.lo,
                    "hi": spec.hi,
                    "buckets": spec.buckets,
                    "top_k": spec.top_k,
                    "overflow_label": spec.overflow_label,
                },
            }
        )
    return {"attributes": out}


def _schema_from_doc(doc: dict) -> Schema:
    attrs = []
    for entry in doc["attributes"]:
        b = entry["bucketizer"]
        spec = BucketizerSpec(
            b["kind"],
            lo=b["lo"],
            hi=b["hi"],
            buckets=b["buckets"],
            top_k=b.get("top_k"),
            overflow_label=b.get("overflow_label"),
        )
        attrs.append(
            AttributeMeta(entry["name"], entry["kind"], spec, tuple(entry["domain"]))
        )
    return Schema(tuple(attrs))


def _nodes_to_table(terms) -> tuple:
    """Flatten the DAG into a child-before-parent node table."""
    table = []
    index = {}

    def visit(node: PolyNode) -> int:
        key = id(node)
        if key in index:
            return index[key]
        if node.kind in (VAR, CORRECTION):
            entry = {"kind": node.kind, "stat": node.stat_id}
        else:
            entry = {"kind": node.kind, "children": [visit(c) for c in node.children]}
        table.append(entry)
        index[key] = len(table) - 1
        return index[key]

    term_ids = [visit(t) for t in terms]
    return table, term_ids


def _nodes_from_table(table, term_ids):
    nodes = []
    for i, entry in enumerate(table):
        kind = entry["kind"]
        if kind in (VAR, CORRECTION):
            nodes.append(PolyNode(kind, stat_id=entry["stat"]))
        elif kind in (SUM, PRODUCT):
            children = [nodes[c] for c in entry["children"]]
            if any(c >= i for c in entry["children"]):
                raise SerializationError(f"node {i}: forward child reference")
            nodes.append(PolyNode(kind, children=children))
        else:
            raise SerializationError(f"node {i}: unknown kind {kind!r}")
    return [nodes[t] for t in term_ids]


def serialize_summary(summary: Summary) -> dict:
    schema = summary.schema
    stats_doc = []
    for st in summary.stats:
        clauses = {
            attr: _clause_to_doc(cl, schema.attribute(attr))
            for attr, cl in st.predicate.clauses
        }
        stats_doc.append(
            {
                "id": st.id,
                "kind": "1d" if st.is_1d else "multi",
                "clauses": clauses,
                "target": st.target,
                "alpha": float(summary.alpha[st.id]),
            }
        )
    table, term_ids = _nodes_to_table(summary.poly.terms)
    diag = summary.diagnostics
    return {
        "version": FORMAT_VERSION,
        "n": summary.n,
        "schema": _schema_to_doc(schema),
        "statistics": stats_doc,
        "factorization": {"nodes": table, "terms": term_ids},
        "diagnostics": {
            "sweeps": diag.sweeps,
            "converged": diag.converged,
            "final_residual": diag.final_residual,
        },
    }


def load_summary(doc: dict) -> Summary:
    if not isinstance(doc, dict) or "version" not in doc:
        raise SerializationError("document is not a summary (missing 'version')")
    if doc["version"] != FORMAT_VERSION:
        raise SerializationError(
            f"unsupported format version {doc['version']} (expected {FORMAT_VERSION})"
        )
    try:
        schema = _schema_from_doc(doc["schema"])
        statistics = []
        alpha = np.zeros(len(doc["statistics"]))
        for entry in doc["statistics"]:
            clauses = {
                attr: _clause_from_doc(cdoc, schema.attribute(attr))
                for attr, cdoc in entry["clauses"].items()
            }
            statistics.append(
                Statistic(entry["id"], Predicate.of(**clauses), entry["target"])
            )
            alpha[entry["id"]] = entry["alpha"]
        stats = StatisticSet(schema, sorted(statistics, key=lambda s: s.id), doc["n"])
        terms = _nodes_from_table(
            doc["factorization"]["nodes"], doc["factorization"]["terms"]
        )
        poly = CompressedPolynomial(terms, stats)
        diag_doc = doc.get("diagnostics", {})
        diagnostics = SolveDiagnostics(
            sweeps=diag_doc.get("sweeps", 0),
            converged=diag_doc.get("converged", False),
            final_residual=diag_doc.get("final_residual", float("inf")),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise SerializationError(f"malformed summary document: {exc!r}") from exc
    summary = Summary(poly, stats, alpha=alpha, diagnostics=diagnostics)
    summary.warm()
    return summary


def save_summary(summary: Summary, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialize_summary(summary), fh)


def read_summary(path) -> Summary:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SerializationError(
                f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}"
            ) from exc
    return load_summary(doc)
