"""The compressed multilinear polynomial and its expanded oracle.

The model's normalizer is a polynomial P over one variable per statistic,
multilinear (degree <= 1 per variable). The compressed form factors P into:

  part i   - the product over attributes of their full 1D variable sums;
  parts ii/iii - for every combination of multiD attribute sets, the 1D sums
    of the uncovered attributes times inclusion-exclusion correction terms,
    one per conflict-free group of multiD statistics.

The expanded form enumerates every possible tuple and is kept only as a
test oracle behind a size cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import Schema, Statistic, StatisticSet


# ---------------------------------------------------------------------------
# Expression DAG
# ---------------------------------------------------------------------------

VAR = "var"
CORRECTION = "correction"
SUM = "sum"
PRODUCT = "product"


class PolyNode:
    """One node of the expression DAG.

    var_ids is the set of statistic ids reachable below the node; it drives
    both cache invalidation (a cached value stays valid when no dirty
    variable occurs below) and the containment checks during evaluation.
    leaf_ids is a fast path for sums whose children are all plain variables.
    """

    __slots__ = ("kind", "stat_id", "children", "var_ids", "leaf_ids")

    def __init__(self, kind, stat_id=None, children=()):
        self.kind = kind
        self.stat_id = stat_id
        self.children = tuple(children)
        if kind in (VAR, CORRECTION):
            self.var_ids = frozenset((stat_id,))
            self.leaf_ids = None
        else:
            self.var_ids = frozenset().union(*(c.var_ids for c in self.children))
            if kind == SUM and all(c.kind == VAR for c in self.children):
                self.leaf_ids = np.array([c.stat_id for c in self.children], dtype=np.intp)
            else:
                self.leaf_ids = None

    def __repr__(self):
        if self.kind in (VAR, CORRECTION):
            return f"{self.kind}({self.stat_id})"
        return f"{self.kind}[{len(self.children)}]"


def var_node(stat_id: int) -> PolyNode:
    return PolyNode(VAR, stat_id=stat_id)


def correction_node(stat_id: int) -> PolyNode:
    return PolyNode(CORRECTION, stat_id=stat_id)


def sum_of_vars(stat_ids: Iterable[int]) -> PolyNode:
    return PolyNode(SUM, children=[var_node(j) for j in stat_ids])


def _sum(children) -> PolyNode:
    children = list(children)
    return children[0] if len(children) == 1 else PolyNode(SUM, children=children)


def _product(children) -> PolyNode:
    children = list(children)
    return children[0] if len(children) == 1 else PolyNode(PRODUCT, children=children)


def _eval_node(node: PolyNode, values: np.ndarray, dirty, cache) -> float:
    if cache is not None:
        cached = cache.get(id(node))
        if cached is not None and dirty.isdisjoint(node.var_ids):
            return cached
    kind = node.kind
    if kind == VAR:
        return float(values[node.stat_id])
    if kind == CORRECTION:
        return float(values[node.stat_id]) - 1.0
    if kind == SUM:
        if node.leaf_ids is not None:
            return float(values[node.leaf_ids].sum())
        return sum(_eval_node(c, values, dirty, cache) for c in node.children)
    acc = 1.0
    for c in node.children:
        acc *= _eval_node(c, values, dirty, cache)
        if acc == 0.0:
            # A zero factor annihilates the product; correctness is
            # unaffected because every factor is finite.
            return 0.0
    return acc


def _warm_node(node: PolyNode, values: np.ndarray, cache: dict) -> float:
    cached = cache.get(id(node))
    if cached is not None:
        return cached
    kind = node.kind
    if kind == VAR:
        val = float(values[node.stat_id])
    elif kind == CORRECTION:
        val = float(values[node.stat_id]) - 1.0
    elif kind == SUM:
        if node.leaf_ids is not None:
            val = float(values[node.leaf_ids].sum())
        else:
            val = sum(_warm_node(c, values, cache) for c in node.children)
    else:
        val = 1.0
        for c in node.children:
            val *= _warm_node(c, values, cache)
    cache[id(node)] = val
    return val


@dataclass(frozen=True)
class Assignment:
    """Variable values plus the set of 1D variables forced to zero.

    The zero set is how query predicates enter evaluation: every 1D variable
    whose statistic value fails the query is zeroed; multiD variables always
    keep their solved values.
    """

    values: np.ndarray
    zero_ids: frozenset = frozenset()


class CompressedPolynomial:
    """Factored P: a top-level sum of independent terms over a shared DAG."""

    def __init__(self, terms, stats: StatisticSet):
        self.terms = tuple(terms)
        self.stats = stats
        self.root = _sum(self.terms) if len(self.terms) != 1 else self.terms[0]

    def evaluate(self, assignment: Assignment, cache: Optional[dict] = None) -> float:
        values = assignment.values
        zero_ids = assignment.zero_ids
        if zero_ids:
            values = values.copy()
            values[list(zero_ids)] = 0.0
        return _eval_node(self.root, values, zero_ids, cache)

    def warm_cache(self, values: np.ndarray) -> dict:
        """Evaluate once at the solved values, memoizing every node.

        The returned dict belongs to the caller (typically one per Summary
        snapshot), so two summaries sharing the DAG never share caches.
        """
        cache = {}
        _warm_node(self.root, np.asarray(values, dtype=float), cache)
        return cache


def evaluate(poly: CompressedPolynomial, assignment: Assignment, cache=None) -> float:
    return poly.evaluate(assignment, cache=cache)


def partial_value(poly, stat_id: int, assignment: Assignment, cache=None):
    """Split P = alpha_j * A + B by multilinearity; returns (B, A).

    Never symbolic: B is P at alpha_j := 0 and A is P at alpha_j := 1
    minus B (two evaluations).
    """
    values = assignment.values
    dirty = assignment.zero_ids | {stat_id}
    at0 = values.copy()
    if assignment.zero_ids:
        at0[list(assignment.zero_ids)] = 0.0
    at0[stat_id] = 0.0
    b = _eval_node(poly.root, at0, dirty, cache)
    at0[stat_id] = 1.0
    a = _eval_node(poly.root, at0, dirty, cache) - b
    return b, a


def size_report(poly: CompressedPolynomial) -> dict:
    """Size counters: 1D variable references, correction factors, DAG nodes.

    References are counted with multiplicity (a shared sum node referenced
    by several terms counts once per occurrence); `nodes` counts distinct
    node objects.
    """
    one_d_ids = {s.id for s in poly.stats if s.is_1d}
    counts = {"one_d_refs": 0, "correction_terms": 0}
    seen = set()

    def walk(node):
        seen.add(id(node))
        if node.kind == VAR:
            if node.stat_id in one_d_ids:
                counts["one_d_refs"] += 1
            return
        if node.kind == CORRECTION:
            counts["correction_terms"] += 1
            return
        if node.leaf_ids is not None:
            hits = sum(1 for j in node.leaf_ids if int(j) in one_d_ids)
            counts["one_d_refs"] += hits
            for c in node.children:
                seen.add(id(c))
            return
        for c in node.children:
            walk(c)

    walk(poly.root)
    return {**counts, "nodes": len(seen)}


# ---------------------------------------------------------------------------
# Conflict-free groups
# ---------------------------------------------------------------------------

def _stat_index_sets(stat: Statistic, schema: Schema) -> dict:
    return stat.index_sets(schema)


def _merge_index_sets(inters: dict, other: dict):
    """Intersect two attr->index-set maps; None when any attribute empties."""
    merged = dict(inters)
    for attr, idx in other.items():
        if attr in merged:
            both = merged[attr] & idx
            if not both:
                return None
            merged[attr] = both
        else:
            merged[attr] = idx
    return merged


def _enumerate_groups(stats_by_pair: dict, schema: Schema):
    """All conflict-free groups taking at most one statistic per pair.

    Yields (stat-id frozenset, pair-key frozenset, merged index sets) for
    every nonempty conflict-free combination. Exponential in the number of
    pairs in the worst case; pair budgets keep this small in practice.
    """
    pairs = sorted(stats_by_pair)
    groups = [(frozenset(), frozenset(), {})]
    for pair in pairs:
        extended = []
        for ids, pair_set, inters in groups:
            for st in stats_by_pair[pair]:
                merged = _merge_index_sets(inters, _stat_index_sets(st, schema))
                if merged is not None:
                    extended.append((ids | {st.id}, pair_set | {pair}, merged))
        groups.extend(extended)
    return [g for g in groups if g[0]]


def find_no_conflict_groups(stats_by_pair: dict, schema: Schema, outer: bool = False) -> dict:
    """Conflict-free groups keyed by the set of pair keys they combine.

    outer=False: the inner theta-join — only full groups taking one
    statistic from every input pair. outer=True: all *maximal* conflict-free
    groups, including partial ones that no statistic can extend.
    """
    groups = _enumerate_groups(stats_by_pair, schema)
    result = {}
    if not outer:
        full = frozenset(stats_by_pair)
        for ids, pair_set, _ in groups:
            if pair_set == full:
                result.setdefault(pair_set, set()).add(ids)
        return result
    for ids, pair_set, inters in groups:
        extendable = False
        for pair in stats_by_pair:
            if pair in pair_set:
                continue
            for st in stats_by_pair[pair]:
                if _merge_index_sets(inters, _stat_index_sets(st, schema)) is not None:
                    extendable = True
                    break
            if extendable:
                break
        if not extendable:
            result.setdefault(pair_set, set()).add(ids)
    return result


def conflict_reduce(stats_by_pair: dict, schema: Schema) -> dict:
    """Drop statistics that join with no statistic of another pair.

    Statistics surviving appear in at least one conflict-free group of size
    >= 2; with a single pair the result is empty.
    """
    keep = set()
    for ids, _, _ in _enumerate_groups(stats_by_pair, schema):
        if len(ids) >= 2:
            keep |= ids
    reduced = {}
    for pair, stats in stats_by_pair.items():
        kept = [st for st in stats if st.id in keep]
        if kept:
            reduced[pair] = kept
    return reduced


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_term(group, stats: StatisticSet, schema: Schema) -> PolyNode:
    """The correction term for one conflict-free group S.

    Product over the group's attributes of the 1D variables compatible with
    S's combined ranges, times (alpha_j - 1) for each j in S.
    """
    group = sorted(group, key=lambda s: s.id)
    inters = {}
    for st in group:
        inters = _merge_index_sets(inters, _stat_index_sets(st, schema))
        assert inters is not None, "build_term requires a conflict-free group"
    factors = []
    for meta in schema:
        if meta.name in inters:
            ids = [
                stats.one_d[(meta.name, v)].id for v in sorted(inters[meta.name])
            ]
            factors.append(sum_of_vars(ids))
    for st in group:
        factors.append(correction_node(st.id))
    return _product(factors)


def _full_one_d_sums(stats: StatisticSet) -> dict:
    """One shared full-domain sum node per attribute (part i factors)."""
    sums = {}
    for meta in stats.schema:
        ids = [stats.one_d[(meta.name, v)].id for v in range(meta.size)]
        sums[meta.name] = sum_of_vars(ids)
    return sums


def _combination_term(idx, groups, stats, schema, one_d_sums):
    """Term for one pair combination: uncovered 1D sums x summed corrections."""
    covered = set()
    for pair in idx:
        covered |= set(pair)
    ordered = sorted(groups, key=lambda g: tuple(sorted(g)))
    subterms = [
        build_term([stats.stat(j) for j in g], stats, schema) for g in ordered
    ]
    factors = [one_d_sums[meta.name] for meta in schema if meta.name not in covered]
    factors.append(_sum(subterms))
    return _product(factors)


def build_compressed_naive(stats: StatisticSet) -> CompressedPolynomial:
    """Direct construction: inner-join every pair combination separately."""
    schema = stats.schema
    one_d_sums = _full_one_d_sums(stats)
    terms = [_product([one_d_sums[m.name] for m in schema])]
    pairs = stats.pair_keys
    for k in range(1, len(pairs) + 1):
        for idx in itertools.combinations(pairs, k):
            sub = {p: stats.by_pair[p] for p in idx}
            joined = find_no_conflict_groups(sub, schema, outer=False)
            groups = joined.get(frozenset(idx), set())
            if groups:
                terms.append(_combination_term(idx, groups, stats, schema, one_d_sums))
    return CompressedPolynomial(terms, stats)


def build_compressed_optimized(stats: StatisticSet) -> CompressedPolynomial:
    """Single outer join + projections instead of one join per combination.

    Size-1 terms come straight from the statistic lists. For k >= 2, groups
    are projections of the maximal conflict-free groups (computed once over
    the conflict-reduced statistics); repeated projections are dropped.
    """
    schema = stats.schema
    one_d_sums = _full_one_d_sums(stats)
    terms = [_product([one_d_sums[m.name] for m in schema])]
    pairs = stats.pair_keys
    for pair in pairs:
        groups = {frozenset((st.id,)) for st in stats.by_pair[pair]}
        terms.append(_combination_term((pair,), groups, stats, schema, one_d_sums))
    if len(pairs) >= 2:
        reduced = conflict_reduce(dict(stats.by_pair), schema)
        sat_groups = find_no_conflict_groups(reduced, schema, outer=True)
        pair_of = {st.id: st.pair_key for st in stats if not st.is_1d}
        for k in range(2, len(pairs) + 1):
            for idx in itertools.combinations(pairs, k):
                idx_set = frozenset(idx)
                projections = set()
                for key, groups in sat_groups.items():
                    if idx_set <= key:
                        for g in groups:
                            projections.add(
                                frozenset(j for j in g if pair_of[j] in idx_set)
                            )
                if projections:
                    terms.append(
                        _combination_term(idx, projections, stats, schema, one_d_sums)
                    )
    return CompressedPolynomial(terms, stats)


# ---------------------------------------------------------------------------
# Expanded oracle
# ---------------------------------------------------------------------------

class ExpandedModel:
    """P as an explicit sum over all possible tuples. Oracle use only."""

    def __init__(self, stats: StatisticSet, tuples: np.ndarray, membership: np.ndarray):
        self.stats = stats
        self.tuples = tuples          # (d, m) bucket indices
        self.membership = membership  # (d, k) booleans: tuple satisfies stat

    @property
    def d(self) -> int:
        return len(self.tuples)

    def monomial_values(self, assignment: Assignment) -> np.ndarray:
        values = np.asarray(assignment.values, dtype=float)
        if assignment.zero_ids:
            values = values.copy()
            values[list(assignment.zero_ids)] = 0.0
        out = np.empty(self.d)
        step = 100_000
        for lo in range(0, self.d, step):
            block = self.membership[lo : lo + step]
            out[lo : lo + step] = np.where(block, values[None, :], 1.0).prod(axis=1)
        return out

    def evaluate(self, assignment: Assignment) -> float:
        return float(self.monomial_values(assignment).sum())


def build_expanded(stats: StatisticSet, cap: int = 10**6) -> ExpandedModel:
    schema = stats.schema
    d = schema.tuple_space_size()
    if d > cap:
        raise ValueError(f"tuple space {d} exceeds expanded-model cap {cap}")
    grids = np.meshgrid(*[np.arange(m.size) for m in schema], indexing="ij")
    tuples = np.stack([g.reshape(-1) for g in grids], axis=1)
    k = len(stats)
    membership = np.zeros((d, k), dtype=bool)
    for st in stats:
        mask = np.ones(d, dtype=bool)
        for attr, cl in st.predicate.clauses:
            if not cl.is_any:
                mask &= cl.mask(tuples[:, schema.index_of(attr)])
        membership[:, st.id] = mask
    return ExpandedModel(stats, tuples, membership)
