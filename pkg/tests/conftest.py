"""Shared builders for hand-written and randomized model configurations."""

from __future__ import annotations

import numpy as np
import pytest

from maxent_aqp.core import (
    AttributeMeta,
    BucketizerSpec,
    Clause,
    Dataset,
    Predicate,
    Schema,
    Statistic,
    StatisticSet,
)
from maxent_aqp.polynomial import build_compressed_optimized
from maxent_aqp.solver import SolverConfig, Summary, solve


def cat_meta(name: str, size: int) -> AttributeMeta:
    labels = tuple(f"{name.lower()}{v + 1}" for v in range(size))
    return AttributeMeta(name, "categorical", BucketizerSpec("categorical"), labels)


def make_schema(sizes: dict) -> Schema:
    return Schema(tuple(cat_meta(name, size) for name, size in sizes.items()))


def make_stat_set(schema: Schema, one_d_targets: dict, multi=(), n=None) -> StatisticSet:
    """Dense-id statistic set: all 1D stats first, then the given multiD ones.

    one_d_targets: attr -> per-value target tuple.
    multi: [(clauses dict attr->Clause, target), ...]
    """
    if n is None:
        n = sum(one_d_targets[next(iter(one_d_targets))])
    stats = []
    sid = 0
    for meta in schema:
        for v in range(meta.size):
            stats.append(
                Statistic(sid, Predicate.of(**{meta.name: Clause.point(v)}),
                          float(one_d_targets[meta.name][v]))
            )
            sid += 1
    for clauses, target in multi:
        stats.append(Statistic(sid, Predicate.of(**clauses), float(target)))
        sid += 1
    return StatisticSet(schema, stats, n)


# ---------------------------------------------------------------------------
# Hand-written reference configurations (all 3 attributes x 2 values, n = 10)
# ---------------------------------------------------------------------------

REF_SIZES = {"A": 2, "B": 2, "C": 2}
REF_1D = {"A": (3, 7), "B": (8, 2), "C": (6, 4)}

# The 10-tuple instance realizing the reference 1D statistics; also used to
# exercise ingestion. Rows are bucket-index triples (A, B, C).
REF_ROWS = (
    (0, 1, 1),
    (0, 0, 1),
    (0, 0, 1),
    (1, 1, 0),
    (1, 0, 0),
    (1, 0, 0),
    (1, 0, 0),
    (1, 0, 0),
    (1, 0, 0),
    (1, 0, 1),
)

REF_MULTI = (
    ({"A": Clause.point(0), "B": Clause.point(0)}, 2),
    ({"A": Clause.point(1), "B": Clause.point(1)}, 1),
    ({"B": Clause.point(0), "C": Clause.point(0)}, 5),
    ({"B": Clause.point(1), "C": Clause.point(0)}, 1),
)


@pytest.fixture
def ref_schema():
    return make_schema(REF_SIZES)


@pytest.fixture
def ref_1d_stats(ref_schema):
    """1D-only statistic set of the reference instance."""
    return make_stat_set(ref_schema, REF_1D, n=10)


@pytest.fixture
def ref_multi_stats(ref_schema):
    """Reference instance plus its four 2D statistics."""
    return make_stat_set(ref_schema, REF_1D, multi=REF_MULTI, n=10)


@pytest.fixture
def ref_dataset(ref_schema):
    return Dataset(ref_schema, np.array(REF_ROWS, dtype=np.int64))


@pytest.fixture
def ref_summary(ref_1d_stats):
    return solve(Summary(build_compressed_optimized(ref_1d_stats), ref_1d_stats))


# ---------------------------------------------------------------------------
# Randomized configurations
# ---------------------------------------------------------------------------

def random_statistic_set(rng: np.random.Generator, max_attrs=3, max_size=6,
                         max_pairs=3, max_rects=4) -> StatisticSet:
    """Random small schema with disjoint multiD rectangles and data-backed
    targets (a synthetic instance keeps every target feasible)."""
    m = int(rng.integers(1, max_attrs + 1))
    names = [chr(ord("A") + i) for i in range(m)]
    sizes = {name: int(rng.integers(2, max_size + 1)) for name in names}
    schema = make_schema(sizes)

    n = int(rng.integers(5, 60))
    table = np.column_stack(
        [rng.integers(0, sizes[name], size=n) for name in names]
    ).astype(np.int64)
    one_d = {
        name: tuple(
            np.bincount(table[:, i], minlength=sizes[name]).astype(float)
        )
        for i, name in enumerate(names)
    }

    multi = []
    if m >= 2:
        candidate_sets = []
        for k in (2, 3):
            if k <= m:
                from itertools import combinations

                candidate_sets.extend(combinations(names, k))
        rng.shuffle(candidate_sets)
        for attrs in candidate_sets[: int(rng.integers(0, max_pairs + 1))]:
            # Disjoint rectangles from a random coarse grid per attribute.
            cuts = {}
            for a in attrs:
                size = sizes[a]
                parts = int(rng.integers(1, min(3, size) + 1))
                bounds = sorted(
                    set([0, size]) | set(rng.integers(1, size, size=parts - 1).tolist())
                )
                cuts[a] = [
                    (bounds[i], bounds[i + 1] - 1) for i in range(len(bounds) - 1)
                ]
            from itertools import product as iproduct

            cells = list(iproduct(*[range(len(cuts[a])) for a in attrs]))
            rng.shuffle(cells)
            for cell in cells[: int(rng.integers(1, max_rects + 1))]:
                clauses = {}
                mask = np.ones(n, dtype=bool)
                for a, ci in zip(attrs, cell):
                    lo, hi = cuts[a][ci]
                    clauses[a] = Clause.range(lo, hi)
                    col = table[:, names.index(a)]
                    mask &= (col >= lo) & (col <= hi)
                multi.append((clauses, float(mask.sum())))
    return make_stat_set(schema, one_d, multi=multi, n=n)


def solved_random_model(rng: np.random.Generator, **kwargs) -> Summary:
    stats = random_statistic_set(rng, **kwargs)
    poly = build_compressed_optimized(stats)
    return solve(Summary(poly, stats), SolverConfig(max_sweeps=40))
