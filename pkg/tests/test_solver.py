"""Coordinate updates, convergence, the dual, and invariances."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxent_aqp.polynomial import build_compressed_optimized
from maxent_aqp.solver import (
    SolverConfig,
    Summary,
    constraint_residuals,
    dual_value,
    expected_count,
    solve,
    update_alpha,
)

from conftest import make_schema, make_stat_set, random_statistic_set, solved_random_model


def two_value_summary(alpha=None):
    """Single attribute, two values, targets (3, 7) of n = 10."""
    stats = make_stat_set(make_schema({"A": 2}), {"A": (3, 7)}, n=10)
    return Summary(build_compressed_optimized(stats), stats, alpha=alpha)


class TestCoordinateUpdate:
    def test_closed_form_two_values(self):
        summary = two_value_summary(alpha=np.array([1.0, 1.0]))
        # P = a0 + a1; update for target 3 of 10 with the other at 1:
        # 3 * 1 / (7 * 1) = 3/7.
        assert update_alpha(summary, 0) == pytest.approx(3 / 7, abs=1e-15)

    def test_update_is_exact(self):
        summary = two_value_summary(alpha=np.array([1.0, 1.0]))
        summary.alpha[0] = update_alpha(summary, 0)
        assert expected_count(summary, 0) == pytest.approx(3.0, abs=1e-12)

    def test_zero_target_pins_zero(self):
        stats = make_stat_set(make_schema({"A": 2}), {"A": (10, 0)}, n=10)
        summary = Summary(build_compressed_optimized(stats), stats)
        assert update_alpha(summary, 1) == 0.0

    def test_full_target_keeps_value(self):
        stats = make_stat_set(make_schema({"A": 2}), {"A": (10, 0)}, n=10)
        summary = Summary(build_compressed_optimized(stats), stats,
                          alpha=np.array([2.5, 0.0]))
        assert update_alpha(summary, 0) == 2.5

    def test_random_coordinate_exactness(self):
        rng = np.random.default_rng(11)
        stats = random_statistic_set(rng)
        summary = Summary(build_compressed_optimized(stats), stats)
        for st_ in stats:
            if 0 < st_.target < stats.n:
                summary.alpha[st_.id] = update_alpha(summary, st_.id)
                assert expected_count(summary, st_.id) == pytest.approx(
                    st_.target, abs=1e-12 * stats.n
                )


class TestDual:
    def test_reference_value(self):
        # 3 ln(3/7) - 10 ln(10/7), computed independently.
        summary = two_value_summary(alpha=np.array([3 / 7, 1.0]))
        assert dual_value(summary) == pytest.approx(-6.108643020548935, abs=1e-12)

    def test_zero_alpha_with_mass_is_minus_inf(self):
        summary = two_value_summary(alpha=np.array([0.0, 1.0]))
        assert dual_value(summary) == -math.inf

    def test_monotone_over_sweeps(self, ref_multi_stats):
        summary = Summary(build_compressed_optimized(ref_multi_stats), ref_multi_stats)
        solve(summary, SolverConfig(threshold=1e-12, max_sweeps=12))
        duals = summary.diagnostics.dual_values
        assert len(duals) >= 2
        assert all(b >= a - 1e-10 for a, b in zip(duals, duals[1:]))


class TestSolve:
    def test_reference_model_converges(self, ref_multi_stats):
        summary = solve(Summary(build_compressed_optimized(ref_multi_stats),
                                ref_multi_stats))
        assert summary.diagnostics.converged
        assert summary.diagnostics.final_residual < 1e-6
        for st_ in ref_multi_stats:
            assert expected_count(summary, st_.id) == pytest.approx(
                st_.target, abs=1e-5
            )

    def test_nonnegative_alpha(self, ref_summary):
        assert (ref_summary.alpha >= 0).all()

    def test_zero_statistics_stay_zero(self):
        stats = make_stat_set(make_schema({"A": 3, "B": 2}),
                              {"A": (5, 5, 0), "B": (6, 4)}, n=10)
        summary = solve(Summary(build_compressed_optimized(stats), stats))
        assert summary.alpha[2] == 0.0
        residuals, _ = constraint_residuals(summary)
        assert residuals[2] == 0.0

    def test_nonconvergence_flagged_not_raised(self, ref_multi_stats):
        summary = solve(
            Summary(build_compressed_optimized(ref_multi_stats), ref_multi_stats),
            SolverConfig(threshold=1e-15, max_sweeps=1),
        )
        assert not summary.diagnostics.converged
        assert summary.diagnostics.sweeps == 1
        assert math.isfinite(summary.diagnostics.final_residual)

    def test_warm_start_keeps_alpha(self, ref_multi_stats):
        cold = solve(Summary(build_compressed_optimized(ref_multi_stats),
                             ref_multi_stats))
        warm = cold.clone()
        solve(warm, SolverConfig(warm_start=True))
        assert warm.diagnostics.sweeps <= cold.diagnostics.sweeps


class TestInvariances:
    def test_per_attribute_scale_freedom(self, ref_summary):
        scaled = ref_summary.clone()
        a_ids = [s.id for s in ref_summary.stats.by_attr["A"]]
        scaled.alpha[a_ids] *= 17.0
        scaled.invalidate_cache()
        for st_ in ref_summary.stats:
            assert expected_count(scaled, st_.id) == pytest.approx(
                expected_count(ref_summary, st_.id), rel=1e-12
            )


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_solved_models_meet_targets(seed):
    rng = np.random.default_rng(seed)
    summary = solved_random_model(rng, max_attrs=2, max_size=4, max_pairs=1)
    if not summary.diagnostics.converged:
        return
    _, max_residual = constraint_residuals(summary)
    assert max_residual < 1e-5
    assert (summary.alpha >= 0).all()
