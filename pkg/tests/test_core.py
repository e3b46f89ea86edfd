"""Schema, bucketizers, predicates, and statistic-set validation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxent_aqp.core import (
    AttributeMeta,
    BucketizerSpec,
    Clause,
    DomainError,
    Predicate,
    Statistic,
    bucketize_value,
    clause_implies,
    numeric_bucket_labels,
    parse_schema_config,
    predicate_matches,
    schema_config_to_dict,
    validate_statistic_set,
)

from conftest import REF_1D, REF_MULTI, make_schema, make_stat_set


def numeric_meta(lo=0, hi=100, buckets=10):
    spec = BucketizerSpec("numeric", lo=lo, hi=hi, buckets=buckets)
    return AttributeMeta("x", "numeric", spec, numeric_bucket_labels(spec))


class TestBucketize:
    def test_equi_width(self):
        assert bucketize_value(numeric_meta(), 15) == 1

    def test_edges_clamp(self):
        meta = numeric_meta()
        assert bucketize_value(meta, 0) == 0
        assert bucketize_value(meta, 100) == 9  # upper edge joins last bucket
        assert bucketize_value(meta, -3) == 0
        assert bucketize_value(meta, 1e9) == 9

    def test_categorical_overflow(self):
        spec = BucketizerSpec("categorical", overflow_label="Other")
        meta = AttributeMeta("city", "categorical", spec, ("SEA", "PDX", "Other"))
        assert bucketize_value(meta, "SEA") == 0
        assert bucketize_value(meta, "BOI") == 2

    def test_unknown_label_without_overflow(self):
        spec = BucketizerSpec("categorical")
        meta = AttributeMeta("city", "categorical", spec, ("SEA", "PDX"))
        with pytest.raises(DomainError):
            bucketize_value(meta, "BOI")


class TestPredicates:
    def test_any_matches_everything(self, ref_schema):
        assert predicate_matches(Predicate.true(), ref_schema, (0, 1, 0))

    def test_point(self, ref_schema):
        pred = Predicate.of(A=Clause.point(0))
        assert predicate_matches(pred, ref_schema, (0, 1, 1))
        assert not predicate_matches(pred, ref_schema, (1, 1, 1))

    def test_range_inclusive(self):
        schema = make_schema({"A": 6, "B": 3})
        pred = Predicate.of(A=Clause.range(2, 4))
        assert predicate_matches(pred, schema, (4, 0))
        assert not predicate_matches(pred, schema, (5, 0))

    def test_conjunction_distributes(self, ref_schema):
        pred = Predicate.of(A=Clause.point(0), B=Clause.point(1))
        for row in [(0, 1, 0), (0, 0, 0), (1, 1, 0)]:
            expected = all(
                cl.accepts(row[ref_schema.index_of(name)])
                for name, cl in pred.clauses
            )
            assert predicate_matches(pred, ref_schema, row) == expected


class TestClauseImplies:
    def test_point_in_range(self):
        assert clause_implies(Clause.point(3), Clause.range(2, 4), 10)
        assert not clause_implies(Clause.point(5), Clause.range(2, 4), 10)

    def test_any_is_top(self):
        assert clause_implies(Clause.point(3), Clause.any_(), 10)


clause_strategy = st.one_of(
    st.just(Clause.any_()),
    st.integers(0, 7).map(Clause.point),
    st.tuples(st.integers(0, 7), st.integers(0, 7)).map(
        lambda t: Clause.range(min(t), max(t))
    ),
    st.sets(st.integers(0, 7), min_size=1).map(Clause.of),
)


@given(clause_strategy)
def test_implies_reflexive(cl):
    assert clause_implies(cl, cl, 8)


@given(clause_strategy, clause_strategy, clause_strategy)
@settings(max_examples=200)
def test_implies_transitive(a, b, c):
    if clause_implies(a, b, 8) and clause_implies(b, c, 8):
        assert clause_implies(a, c, 8)


class TestValidation:
    def test_reference_set_is_valid(self, ref_multi_stats):
        assert validate_statistic_set(ref_multi_stats) == []

    def test_missing_statistic(self, ref_schema):
        stats = make_stat_set(ref_schema, REF_1D, n=10)
        broken = type(stats)(ref_schema, [
            Statistic(i, s.predicate, s.target)
            for i, s in enumerate(st for st in stats if st.target != 7)
        ], 10)
        violations = validate_statistic_set(broken)
        assert any("A" in v for v in violations)

    def test_overlapping_rectangles(self, ref_schema):
        overlapping = (
            ({"A": Clause.point(0), "B": Clause.range(0, 1)}, 3),
            ({"A": Clause.range(0, 1), "B": Clause.point(0)}, 8),
        )
        stats = make_stat_set(ref_schema, REF_1D, multi=overlapping, n=10)
        assert any("overlap" in v for v in validate_statistic_set(stats))

    def test_one_d_sums(self, ref_multi_stats):
        for meta in ref_multi_stats.schema:
            group = ref_multi_stats.by_attr[meta.name]
            assert len(group) == meta.size
            assert sum(s.target for s in group) == ref_multi_stats.n


def test_schema_config_round_trip(tmp_path):
    doc = {
        "attributes": [
            {"name": "dist", "kind": "numeric", "min": 0, "max": 100, "buckets": 4},
            {"name": "city", "kind": "categorical", "domain": ["SEA", "PDX"],
             "top_k": 2, "overflow": "Other"},
        ]
    }
    parsed = parse_schema_config(doc)
    assert parsed[0][0] == "dist" and parsed[0][1].buckets == 4
    assert parsed[1][2] == ("SEA", "PDX")
    rebuilt = schema_config_to_dict([(name, spec) for name, spec, _ in parsed])
    assert parse_schema_config(rebuilt)[0][1] == parsed[0][1]
