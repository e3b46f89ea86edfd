"""Sampling baselines, error metrics, and the heavy/light/null benchmark."""

import numpy as np
import pytest

from maxent_aqp.core import Clause, Dataset, Predicate
from maxent_aqp.evalkit import (
    BenchmarkSpec,
    exact_group_counts,
    precision_recall_f,
    relative_error,
    run_benchmark,
    sample_estimate,
    stratified_sample,
    uniform_sample,
)

from conftest import REF_ROWS, make_schema


@pytest.fixture
def small_ds():
    schema = make_schema({"A": 2, "B": 2, "C": 2})
    return Dataset(schema, np.array(REF_ROWS, dtype=np.int64))


@pytest.fixture
def medium_ds():
    rng = np.random.default_rng(42)
    schema = make_schema({"A": 6, "B": 5})
    table = np.column_stack([
        rng.integers(0, 6, size=2000),
        rng.integers(0, 5, size=2000),
    ]).astype(np.int64)
    return Dataset(schema, table)


class TestUniformSample:
    def test_rate_one_is_exact(self, medium_ds):
        sample = uniform_sample(medium_ds, 1.0, seed=0)
        assert len(sample.rows) == medium_ds.n
        pred = Predicate.of(A=Clause.point(0))
        exact = (medium_ds.table[:, 0] == 0).sum()
        assert sample_estimate(sample, pred) == exact

    def test_seed_determinism(self, medium_ds):
        a = uniform_sample(medium_ds, 0.1, seed=7)
        b = uniform_sample(medium_ds, 0.1, seed=7)
        assert a.rows.tolist() == b.rows.tolist()

    def test_size_concentrates(self, medium_ds):
        sample = uniform_sample(medium_ds, 0.1, seed=1)
        # Binomial(2000, 0.1): five sigmas around the mean.
        assert 130 < len(sample.rows) < 270

    def test_bad_rate(self, medium_ds):
        with pytest.raises(ValueError):
            uniform_sample(medium_ds, 0.0, seed=0)


class TestStratifiedSample:
    def test_every_stratum_represented(self, medium_ds):
        sample = stratified_sample(medium_ds, ("A",), 0.01, seed=0)
        assert set(sample.rows[:, 0]) == set(range(6))

    def test_scales_are_exact(self, medium_ds):
        sample = stratified_sample(medium_ds, ("A",), 0.05, seed=3)
        # Per stratum: summed scales = stratum size, so the total estimate
        # of the trivial predicate is exactly n.
        assert sample_estimate(sample, Predicate.true()) == medium_ds.n

    def test_stratum_point_query_exact(self, medium_ds):
        sample = stratified_sample(medium_ds, ("A",), 0.05, seed=3)
        for v in range(6):
            exact = (medium_ds.table[:, 0] == v).sum()
            est = sample_estimate(sample, Predicate.of(A=Clause.point(v)))
            assert est == pytest.approx(exact, rel=1e-12)

    def test_rows_in_original_order(self, medium_ds):
        sample = stratified_sample(medium_ds, ("A",), 0.02, seed=5)
        keys = [tuple(r) for r in sample.rows]
        # Re-drawing with the same seed reproduces rows bit-identically.
        again = stratified_sample(medium_ds, ("A",), 0.02, seed=5)
        assert keys == [tuple(r) for r in again.rows]

    def test_requires_strata(self, medium_ds):
        with pytest.raises(ValueError):
            stratified_sample(medium_ds, (), 0.1, seed=0)


class TestMetrics:
    def test_relative_error_cases(self):
        assert relative_error(0, 0) == 0.0
        assert relative_error(10, 10) == 0.0
        assert relative_error(10, 0) == 1.0
        assert relative_error(0, 10) == 1.0
        assert relative_error(10, 30) == pytest.approx(0.5)

    def test_precision_recall_f(self):
        # 4/5 lights detected, 1 null false positive.
        p, r, f = precision_recall_f([1.2, 3.0, 0.8, 2.0, 0.2], [0.0, 0.9, 0.1, 0.0])
        assert p == pytest.approx(4 / 5)
        assert r == pytest.approx(4 / 5)
        assert f == pytest.approx(4 / 5)

    def test_all_missed(self):
        p, r, f = precision_recall_f([0.1, 0.2], [0.0])
        assert (p, r, f) == (0.0, 0.0, 0.0)


class TestBenchmark:
    def test_exact_group_counts(self, small_ds):
        counts = exact_group_counts(small_ds, ("A", "B"))
        assert counts.tolist() == [[2, 1], [6, 1]]
        assert counts.sum() == small_ds.n

    def test_exact_method_scores_perfectly(self, medium_ds):
        def exact(pred):
            from maxent_aqp.core import predicate_mask
            return float(predicate_mask(pred, medium_ds.schema, medium_ds.table).sum())

        spec = BenchmarkSpec(("A", "B"), heavy=5, light=5, null=0, seed=0)
        report = run_benchmark(medium_ds, {"exact": exact}, spec)
        m = report.methods["exact"]
        assert m.heavy_mean_rel_error == 0.0
        assert m.light_mean_rel_error == 0.0
        assert (m.precision, m.recall, m.f_measure) == (1.0, 1.0, 1.0)

    def test_shrunk_query_sets_warn(self, small_ds):
        spec = BenchmarkSpec(("A", "B"), heavy=100, light=100, null=200, seed=0)
        with pytest.warns(UserWarning):
            report = run_benchmark(
                small_ds, {"zero": lambda pred: 0.0}, spec
            )
        assert report.warnings
        assert len(report.queries["heavy"]) == 4  # only 4 nonempty cells

    def test_heavy_and_light_orderings(self, medium_ds):
        spec = BenchmarkSpec(("A", "B"), heavy=3, light=3, null=0, seed=0)
        report = run_benchmark(medium_ds, {}, spec)
        heavy_counts = [c for _, c in report.queries["heavy"]]
        light_counts = [c for _, c in report.queries["light"]]
        assert heavy_counts == sorted(heavy_counts, reverse=True)
        assert light_counts == sorted(light_counts)
        assert min(heavy_counts) >= max(light_counts)

    def test_report_determinism(self, medium_ds):
        sample = uniform_sample(medium_ds, 0.2, seed=9)
        spec = BenchmarkSpec(("A", "B"), heavy=4, light=4, null=0, seed=9)

        def run():
            from maxent_aqp.evalkit import make_sample_method, report_to_dict
            report = run_benchmark(medium_ds, {"s": make_sample_method(sample)}, spec)
            doc = report_to_dict(report)
            for m in doc["methods"].values():
                m.pop("total_time_ms")
                m.pop("latency_p95_ms")
            return doc

        assert run() == run()
