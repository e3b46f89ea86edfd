"""Selection of multi-dimensional statistics.

Covers: choosing which attribute pairs get 2D statistics (by chi-squared),
the per-pair cell heuristics (largest cells / zero cells), K-D-tree rectangle
construction, and matrix seriation (SUGI and weighted-index sorts) that
reorders a contingency matrix before partitioning.
"""

from __future__ import annotations

import heapq
import itertools
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Clause, Predicate, Statistic
from .ingest import ContingencyMatrix, chi_squared, contingency_matrix


# ---------------------------------------------------------------------------
# Pair selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairSelection:
    pairs: tuple          # tuple[(attr1, attr2), ...] in admission order
    scores: dict          # pair -> chi-squared
    mode: str             # "correlation" | "cover"


def _ranked(scores):
    # Descending score; ties by pair name for determinism.
    return sorted(scores, key=lambda p: (-scores[p], p))


def select_pairs_correlation(scores: dict, budget: int) -> PairSelection:
    """Greedy by descending chi-squared; admit a pair only if it brings at
    least one attribute not already covered."""
    chosen = []
    covered = set()
    for pair in _ranked(scores):
        if len(chosen) >= budget:
            break
        if not covered or set(pair) - covered:
            chosen.append(pair)
            covered |= set(pair)
    return PairSelection(tuple(chosen), dict(scores), "correlation")


def select_pairs_cover(scores: dict, budget: int) -> PairSelection:
    """Maximize the number of distinct attributes covered by <= budget pairs;
    ties broken by larger summed chi-squared. Exhaustive for small pair
    counts, greedy otherwise."""
    pairs = _ranked(scores)
    if budget <= 0 or not pairs:
        return PairSelection((), dict(scores), "cover")
    k = min(budget, len(pairs))
    if len(pairs) <= 12:
        best = None
        for size in range(1, k + 1):
            for combo in itertools.combinations(pairs, size):
                covered = len(set().union(*map(set, combo)))
                score = sum(scores[p] for p in combo)
                key = (covered, score, tuple(sorted(combo)))
                if best is None or (key[0], key[1]) > (best[0], best[1]) or (
                    (key[0], key[1]) == (best[0], best[1]) and key[2] < best[2]
                ):
                    best = key
        chosen = tuple(sorted(best[2], key=lambda p: (-scores[p], p)))
        return PairSelection(chosen, dict(scores), "cover")
    chosen = []
    covered = set()
    for _ in range(k):
        candidate = max(
            (p for p in pairs if p not in chosen),
            key=lambda p: (len(set(p) - covered), scores[p], tuple(reversed(p))),
            default=None,
        )
        if candidate is None:
            break
        chosen.append(candidate)
        covered |= set(candidate)
    return PairSelection(tuple(chosen), dict(scores), "cover")


# ---------------------------------------------------------------------------
# Cell heuristics
# ---------------------------------------------------------------------------

def heuristic_large(matrix: np.ndarray, budget: int) -> list:
    """The `budget` cells with the largest counts; ties row-major.

    Returns [(x, y, count), ...]; fewer cells than budget returns them all.
    """
    m = np.asarray(matrix, dtype=float)
    cells = [(x, y) for x in range(m.shape[0]) for y in range(m.shape[1])]
    cells.sort(key=lambda c: (-m[c], c[0], c[1]))
    return [(x, y, float(m[x, y])) for x, y in cells[:budget]]


def heuristic_zero(matrix: np.ndarray, budget: int) -> list:
    """Zero-count cells first (row-major), remaining budget filled with the
    largest nonzero cells."""
    m = np.asarray(matrix, dtype=float)
    zeros = [(x, y) for x in range(m.shape[0]) for y in range(m.shape[1]) if m[x, y] == 0]
    picked = zeros[:budget]
    remaining = budget - len(picked)
    if remaining > 0:
        nonzero = [
            (x, y)
            for x in range(m.shape[0])
            for y in range(m.shape[1])
            if m[x, y] != 0
        ]
        nonzero.sort(key=lambda c: (-m[c], c[0], c[1]))
        picked += nonzero[:remaining]
    return [(x, y, float(m[x, y])) for x, y in picked]


# ---------------------------------------------------------------------------
# K-D tree rectangles
# ---------------------------------------------------------------------------

@dataclass
class KDNode:
    """A rectangle [lx,ux] x [ly,uy] of matrix cells (inclusive bounds)."""

    lx: int
    ux: int
    ly: int
    uy: int
    depth: int = 0
    split_axis: Optional[int] = None
    split_index: Optional[int] = None
    children: tuple = ()

    def cells(self):
        return (self.ux - self.lx + 1) * (self.uy - self.ly + 1)

    def values(self, matrix):
        return matrix[self.lx : self.ux + 1, self.ly : self.uy + 1]

    def sse(self, matrix):
        vals = self.values(matrix)
        return float(((vals - vals.mean()) ** 2).sum())

    def count(self, matrix):
        return float(self.values(matrix).sum())

    def leaves(self):
        if not self.children:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]


def _sse(values) -> float:
    return float(((values - values.mean()) ** 2).sum())


def kd_split(matrix: np.ndarray, rect, axis: int) -> int:
    """Best split position along `axis` for the rectangle (lx,ux,ly,uy).

    Returns the last index kept in the left/upper child, minimizing
    sqrt(SSE_left + SSE_right); ties broken by the smaller index.
    """
    lx, ux, ly, uy = rect
    m = np.asarray(matrix, dtype=float)
    lo, hi = (lx, ux) if axis == 0 else (ly, uy)
    if hi <= lo:
        raise ValueError(f"axis {axis} of rectangle {rect} cannot be split")
    best = None
    for cut in range(lo, hi):
        if axis == 0:
            left = m[lx : cut + 1, ly : uy + 1]
            right = m[cut + 1 : ux + 1, ly : uy + 1]
        else:
            left = m[lx : ux + 1, ly : cut + 1]
            right = m[lx : ux + 1, cut + 1 : uy + 1]
        objective = float(np.sqrt(_sse(left) + _sse(right)))
        if best is None or objective < best[0] - 1e-12:
            best = (objective, cut)
    return best[1]


def build_kd_tree(matrix: np.ndarray, budget: int) -> KDNode:
    """Partition the matrix into min(budget, cells) disjoint leaf rectangles.

    Leaf expansion: always split the leaf with the largest SSE next (FIFO on
    ties); the split axis alternates with node depth, falling back to the
    other axis when the preferred one is a single index.
    """
    m = np.asarray(matrix, dtype=float)
    root = KDNode(0, m.shape[0] - 1, 0, m.shape[1] - 1, depth=0)
    target = min(budget, root.cells())
    counter = itertools.count()
    heap = [(-root.sse(m), next(counter), root)]
    leaves = 1
    while leaves < target and heap:
        _, _, node = heapq.heappop(heap)
        axis = node.depth % 2
        if (node.ux - node.lx if axis == 0 else node.uy - node.ly) < 1:
            axis = 1 - axis
        if (node.ux - node.lx if axis == 0 else node.uy - node.ly) < 1:
            continue  # 1x1 leaf, never split
        cut = kd_split(m, (node.lx, node.ux, node.ly, node.uy), axis)
        if axis == 0:
            kids = (
                KDNode(node.lx, cut, node.ly, node.uy, node.depth + 1),
                KDNode(cut + 1, node.ux, node.ly, node.uy, node.depth + 1),
            )
        else:
            kids = (
                KDNode(node.lx, node.ux, node.ly, cut, node.depth + 1),
                KDNode(node.lx, node.ux, cut + 1, node.uy, node.depth + 1),
            )
        node.split_axis = axis
        node.split_index = cut
        node.children = kids
        for kid in kids:
            heapq.heappush(heap, (-kid.sse(m), next(counter), kid))
        leaves += 1
    return root


def kd_error(leaves, matrix: np.ndarray) -> float:
    """(1/#leaves) * sqrt of the total squared deviation from leaf means."""
    m = np.asarray(matrix, dtype=float)
    total = sum(leaf.sse(m) for leaf in leaves)
    return float(np.sqrt(total)) / len(leaves)


def kd_error_for_budget(matrix: np.ndarray, budget: int) -> float:
    return kd_error(build_kd_tree(matrix, budget).leaves(), matrix)


# ---------------------------------------------------------------------------
# Seriation
# ---------------------------------------------------------------------------

def _sugi_keys(m: np.ndarray) -> list:
    """Mean 1-based index of zero cells per row; rows without zeros sort last."""
    keys = []
    for row in m:
        zero_idx = np.flatnonzero(row == 0) + 1
        keys.append(float(zero_idx.mean()) if len(zero_idx) else float("inf"))
    return keys


def _twod_keys(m: np.ndarray) -> list:
    weights = np.arange(1, m.shape[1] + 1)
    return [float(row @ weights) for row in m]


def _alternating_sort(matrix: np.ndarray, key_fn, max_iter: int):
    m = np.asarray(matrix, dtype=float)
    row_perm = np.arange(m.shape[0])
    col_perm = np.arange(m.shape[1])
    for _ in range(max_iter):
        row_order = np.argsort(np.array(key_fn(m)), kind="stable")
        changed = not np.array_equal(row_order, np.arange(m.shape[0]))
        m = m[row_order, :]
        row_perm = row_perm[row_order]
        col_order = np.argsort(np.array(key_fn(m.T)), kind="stable")
        changed |= not np.array_equal(col_order, np.arange(m.shape[1]))
        m = m[:, col_order]
        col_perm = col_perm[col_order]
        if not changed:
            break
    return row_perm, col_perm


def sugi_sort(matrix: np.ndarray, max_iter: int = 20):
    """Alternate row/column reordering by mean zero-cell index (ascending)."""
    return _alternating_sort(matrix, _sugi_keys, max_iter)


def twod_sort(matrix: np.ndarray, max_iter: int = 20):
    """Alternate row/column reordering by the index-weighted value sum."""
    return _alternating_sort(matrix, _twod_keys, max_iter)


# ---------------------------------------------------------------------------
# Selection pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectionConfig:
    """Knobs for choosing multiD statistics.

    pair_budget is the number of attribute pairs (B_a); stats_per_pair is the
    number of 2D statistics per pair (B_s).
    """

    mode: str = "correlation"        # correlation | cover
    heuristic: str = "composite"     # large | zero | composite
    pair_budget: int = 1
    stats_per_pair: int = 16
    sort: str = "none"               # none | sugi | 2d
    max_iter: int = 20

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "heuristic": self.heuristic,
            "pair_budget": self.pair_budget,
            "stats_per_pair": self.stats_per_pair,
            "sort": self.sort,
            "max_iter": self.max_iter,
        }

    @staticmethod
    def from_dict(doc: dict) -> "SelectionConfig":
        return SelectionConfig(**{k: doc[k] for k in doc})


def indices_to_clause(indices) -> Clause:
    """Contiguous index sets become range/point clauses, others index sets."""
    idx = sorted(indices)
    if len(idx) == 1:
        return Clause.point(idx[0])
    if idx == list(range(idx[0], idx[-1] + 1)):
        return Clause.range(idx[0], idx[-1])
    return Clause.of(idx)


def _rectangles_for_pair(cm: ContingencyMatrix, config: SelectionConfig):
    """Rectangles in matrix coordinates: [(lx,ux,ly,uy,count), ...]."""
    m = cm.matrix
    if config.heuristic == "large":
        return [(x, x, y, y, s) for x, y, s in heuristic_large(m, config.stats_per_pair)]
    if config.heuristic == "zero":
        return [(x, x, y, y, s) for x, y, s in heuristic_zero(m, config.stats_per_pair)]
    if config.heuristic == "composite":
        tree = build_kd_tree(m, config.stats_per_pair)
        return [
            (leaf.lx, leaf.ux, leaf.ly, leaf.uy, leaf.count(m))
            for leaf in tree.leaves()
        ]
    raise ValueError(f"unknown heuristic {config.heuristic!r}")


def select_statistics(ds, config: SelectionConfig, start_id: int = 0):
    """Full multiD selection: pairs by chi-squared, seriation, rectangles.

    Returns (statistics, report). Statistic predicates always reference the
    original (pre-seriation) value indices.
    """
    names = ds.schema.names
    matrices = {}
    scores = {}
    for pair in itertools.combinations(names, 2):
        cm = contingency_matrix(ds, pair[0], pair[1])
        matrices[pair] = cm
        scores[pair] = chi_squared(cm)
    if config.mode == "correlation":
        selection = select_pairs_correlation(scores, config.pair_budget)
    elif config.mode == "cover":
        selection = select_pairs_cover(scores, config.pair_budget)
    else:
        raise ValueError(f"unknown selection mode {config.mode!r}")

    stats = []
    report = {"pair_scores": {f"{a},{b}": s for (a, b), s in scores.items()}, "pairs": []}
    sid = start_id
    for pair in selection.pairs:
        cm = matrices[pair]
        error_before = kd_error_for_budget(cm.matrix, config.stats_per_pair)
        if config.sort == "sugi":
            cm = cm.permuted(*sugi_sort(cm.matrix, config.max_iter))
        elif config.sort == "2d":
            cm = cm.permuted(*twod_sort(cm.matrix, config.max_iter))
        elif config.sort != "none":
            raise ValueError(f"unknown sort {config.sort!r}")
        error_after = kd_error_for_budget(cm.matrix, config.stats_per_pair)
        for lx, ux, ly, uy, count in _rectangles_for_pair(cm, config):
            row_idx = cm.row_perm[lx : ux + 1]
            col_idx = cm.col_perm[ly : uy + 1]
            pred = Predicate.of(
                **{
                    pair[0]: indices_to_clause(row_idx),
                    pair[1]: indices_to_clause(col_idx),
                }
            )
            stats.append(Statistic(sid, pred, float(count)))
            sid += 1
        report["pairs"].append(
            {
                "pair": list(pair),
                "chi_squared": scores[pair],
                "kd_error_unsorted": error_before,
                "kd_error_sorted": error_after,
                "statistics": len(stats),
            }
        )
    return stats, report


def dump_selection_report(report: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
