"""Count, group-by, marginal-probability, and naive join queries.

The production path answers a conjunctive count query by re-evaluating the
polynomial with every 1D variable that fails the query zeroed out, scaled by
n/P. A derivative-based path exists as a cross-check oracle only.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Clause, Predicate, Schema, bucketize_value
from .polynomial import Assignment
from .solver import ModelDegenerateError, Summary

GROUPBY_CELL_CAP = 100_000


class GroupByCapError(ValueError):
    """The group-by domain cross-product exceeds the configured cell cap."""


@dataclass(frozen=True)
class CountQuery:
    predicate: Predicate

    @staticmethod
    def true() -> "CountQuery":
        return CountQuery(Predicate.true())


@dataclass(frozen=True)
class GroupByQuery:
    group_by: tuple
    filter: Predicate = Predicate.true()
    include_zero_groups: bool = True

    def __post_init__(self):
        if len(set(self.group_by)) != len(self.group_by):
            raise ValueError("group-by attributes must be distinct")


@dataclass(frozen=True)
class QueryAnswer:
    expectation: float
    rounded: int
    elapsed_ms: float


def round_half_up(x: float) -> int:
    """Round half up after clamping negatives to zero."""
    return int(math.floor(max(x, 0.0) + 0.5))


def zero_set(summary: Summary, predicate: Predicate) -> frozenset:
    """1D variables whose statistic value is excluded by the predicate."""
    zeros = set()
    for attr, cl in predicate.clauses:
        if cl.is_any:
            continue
        meta = summary.schema.attribute(attr)
        allowed = cl.indices(meta.size)
        for v in range(meta.size):
            if v not in allowed:
                zeros.add(summary.stats.one_d[(attr, v)].id)
    return frozenset(zeros)


def answer_count(summary: Summary, query: CountQuery) -> QueryAnswer:
    start = time.perf_counter()
    p_full = summary.evaluate()
    if p_full <= 0:
        raise ModelDegenerateError(f"P = {p_full}")
    p_query = summary.evaluate(zero_set(summary, query.predicate))
    expectation = summary.n * (p_query / p_full)
    elapsed = (time.perf_counter() - start) * 1000.0
    return QueryAnswer(expectation, round_half_up(expectation), elapsed)


def answer_point_via_derivatives(summary: Summary, point) -> float:
    """Point expectation via nested multilinear finite differences.

    `point` gives one bucket index per schema attribute. Test-path oracle:
    (n/P) * prod_i alpha_{j_i} * the mixed coefficient of those variables.
    """
    schema = summary.schema
    ids = [
        summary.stats.one_d[(meta.name, int(point[i]))].id
        for i, meta in enumerate(schema)
    ]
    poly = summary.poly

    def mixed_coefficient(values, remaining):
        if not remaining:
            return poly.evaluate(Assignment(values))
        j = remaining[0]
        hi = values.copy()
        hi[j] = 1.0
        lo = values.copy()
        lo[j] = 0.0
        return mixed_coefficient(hi, remaining[1:]) - mixed_coefficient(lo, remaining[1:])

    p_full = summary.evaluate()
    if p_full <= 0:
        raise ModelDegenerateError(f"P = {p_full}")
    coeff = mixed_coefficient(summary.alpha.copy(), ids)
    scale = float(np.prod([summary.alpha[j] for j in ids]))
    return summary.n * scale * coeff / p_full


def answer_groupby(summary: Summary, query: GroupByQuery, cap: int = GROUPBY_CELL_CAP):
    """One answer per cell of the group-by domain cross-product.

    Returns [(value-index tuple, QueryAnswer), ...] in domain order; cells
    rounding to 0 are dropped when include_zero_groups is false.
    """
    metas = [summary.schema.attribute(a) for a in query.group_by]
    cells = 1
    for meta in metas:
        cells *= meta.size
    if cells > cap:
        raise GroupByCapError(
            f"group-by spans {cells} cells, above the cap of {cap}; "
            f"raise the cap to at least {cells} or add filters"
        )
    rows = []
    for combo in itertools.product(*[range(m.size) for m in metas]):
        cell_pred = Predicate.of(
            **{meta.name: Clause.point(v) for meta, v in zip(metas, combo)}
        )
        pred = query.filter.conjoin(cell_pred, summary.schema)
        answer = answer_count(summary, CountQuery(pred))
        if query.include_zero_groups or answer.rounded > 0:
            rows.append((combo, answer))
    return rows


def marginal_probability(summary: Summary, point) -> float:
    """Probability the point tuple occurs at all: 1 - (1 - p)^n."""
    pred = Predicate.of(
        **{
            meta.name: Clause.point(int(point[i]))
            for i, meta in enumerate(summary.schema)
        }
    )
    expectation = answer_count(summary, CountQuery(pred)).expectation
    p = min(max(expectation / summary.n, 0.0), 1.0)
    if p >= 1.0:
        return 1.0
    return -math.expm1(summary.n * math.log1p(-p))


def answer_join_count(left: Summary, right: Summary, join_attr: str,
                      left_pred: Predicate = Predicate.true(),
                      right_pred: Predicate = Predicate.true()) -> float:
    """Equi-join count estimate: sum over join values of the two expectations."""
    meta_l = left.schema.attribute(join_attr)
    meta_r = right.schema.attribute(join_attr)
    if meta_l.domain != meta_r.domain:
        raise ValueError(
            f"join attribute {join_attr!r} has mismatched domains between summaries"
        )
    total = 0.0
    for v in range(meta_l.size):
        point = Predicate.of(**{join_attr: Clause.point(v)})
        e_left = answer_count(left, CountQuery(left_pred.conjoin(point, left.schema)))
        e_right = answer_count(right, CountQuery(right_pred.conjoin(point, right.schema)))
        total += e_left.expectation * e_right.expectation
    return total


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------
#
# Query: {"clauses": [{"attr": A, "op": "eq"|"range"|"in", "value"(s): ...}],
#         "groupBy": [...], "includeZeroGroups": bool}
# Values are labels (or raw numbers for numeric attributes), never indices.

def _resolve_value(meta, raw) -> int:
    if meta.kind == "numeric":
        return bucketize_value(meta, raw)
    if raw in meta.domain:
        return meta.domain.index(raw)
    return meta.label_index(str(raw))


def clause_from_json(doc: dict, schema: Schema):
    attr = doc["attr"]
    meta = schema.attribute(attr)
    op = doc["op"]
    if op == "eq":
        return attr, Clause.point(_resolve_value(meta, doc["value"]))
    if op == "range":
        lo, hi = doc["value"]
        lo_idx = _resolve_value(meta, lo)
        hi_idx = _resolve_value(meta, hi)
        if lo_idx > hi_idx:
            raise ValueError(f"range on {attr} is empty after bucketization")
        return attr, Clause.range(lo_idx, hi_idx)
    if op == "in":
        values = doc["values"] if "values" in doc else doc["value"]
        return attr, Clause.of(_resolve_value(meta, v) for v in values)
    raise ValueError(f"unknown clause op {op!r}")


def predicate_from_json(clauses: list, schema: Schema) -> Predicate:
    pred = Predicate.true()
    for doc in clauses:
        attr, cl = clause_from_json(doc, schema)
        pred = pred.conjoin(Predicate.of(**{attr: cl}), schema)
    return pred


def query_from_json(doc: dict, schema: Schema):
    pred = predicate_from_json(doc.get("clauses", []), schema)
    group_by = doc.get("groupBy", [])
    if group_by:
        return GroupByQuery(
            tuple(group_by), pred, bool(doc.get("includeZeroGroups", True))
        )
    return CountQuery(pred)


def answer_to_json(answer: QueryAnswer) -> dict:
    return {
        "expectation": answer.expectation,
        "rounded": answer.rounded,
        "elapsedMs": answer.elapsed_ms,
    }


def groupby_rows_to_json(rows, group_by, schema: Schema) -> list:
    metas = [schema.attribute(a) for a in group_by]
    out = []
    for combo, answer in rows:
        out.append(
            {
                "group": {
                    meta.name: meta.domain[v] for meta, v in zip(metas, combo)
                },
                **answer_to_json(answer),
            }
        )
    return out
