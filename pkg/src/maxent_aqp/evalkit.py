"""Sampling baselines and the heavy/light/null benchmark methodology.

Accuracy is reported as the symmetric relative difference |t - e| / (t + e),
and the ability to tell small-but-present groups (light hitters) apart from
absent ones (nulls) as precision/recall/F over rounded estimates.
"""

from __future__ import annotations

import itertools
import json
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Clause, Dataset, Predicate, predicate_mask
from .query import CountQuery, answer_count, round_half_up


@dataclass(frozen=True)
class SampleSummary:
    """A drawn sample with per-row Horvitz-Thompson scale factors."""

    kind: str          # "uniform" | "stratified"
    rate: float
    schema: object
    rows: np.ndarray   # (k, m) bucketized sampled rows
    scales: np.ndarray
    seed: int
    strata_attrs: tuple = ()


def uniform_sample(ds: Dataset, rate: float, seed: int) -> SampleSummary:
    """Bernoulli(rate) row selection; every kept row scales by 1/rate."""
    if not (0 < rate <= 1):
        raise ValueError("rate must be in (0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random(ds.n) < rate
    rows = ds.table[mask]
    return SampleSummary(
        "uniform", rate, ds.schema, rows, np.full(len(rows), 1.0 / rate), seed
    )


def stratified_sample(ds: Dataset, strata_attrs, rate: float, seed: int) -> SampleSummary:
    """Per-stratum sample of max(1, round(rate * size)) rows w/o replacement.

    Strata are the distinct value combinations over `strata_attrs`; each
    sampled row carries the exact scale stratum_size / sample_size.
    """
    if not strata_attrs:
        raise ValueError("strata_attrs must be nonempty")
    rng = np.random.default_rng(seed)
    cols = [ds.schema.index_of(a) for a in strata_attrs]
    strata = {}
    for i, key in enumerate(map(tuple, ds.table[:, cols])):
        strata.setdefault(key, []).append(i)
    picked = []  # (row index, scale)
    for key in sorted(strata):
        members = np.array(strata[key])
        size = len(members)
        take = min(size, max(1, int(round(rate * size))))
        chosen = rng.choice(members, size=take, replace=False)
        picked.extend((int(i), size / take) for i in chosen)
    picked.sort()  # original-table order, for reproducible row layout
    idx = np.array([i for i, _ in picked], dtype=np.intp)
    scales = np.array([s for _, s in picked])
    return SampleSummary(
        "stratified", rate, ds.schema, ds.table[idx], scales, seed,
        strata_attrs=tuple(strata_attrs),
    )


def sample_estimate(sample: SampleSummary, predicate: Predicate) -> float:
    """Horvitz-Thompson count estimate: summed scales of matching rows."""
    if len(sample.rows) == 0:
        return 0.0
    mask = predicate_mask(predicate, sample.schema, sample.rows)
    return float(sample.scales[mask].sum())


def relative_error(true_count: float, estimate: float) -> float:
    """Symmetric relative difference in [0, 1]; (0, 0) is 0 by convention."""
    if true_count + estimate == 0:
        return 0.0
    return abs(true_count - estimate) / (true_count + estimate)


def precision_recall_f(light_estimates, null_estimates):
    """Classify rounded estimates > 0 as 'present'; lights are the positives."""
    tp = sum(1 for e in light_estimates if round_half_up(e) > 0)
    fp = sum(1 for e in null_estimates if round_half_up(e) > 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / len(light_estimates) if light_estimates else 0.0
    f_measure = (
        2 * precision * recall / (precision + recall) if precision + recall else 0.0
    )
    return precision, recall, f_measure


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkSpec:
    query_attrs: tuple        # attributes whose cross-product defines groups
    heavy: int = 100
    light: int = 100
    null: int = 200
    seed: int = 0


@dataclass
class MethodReport:
    heavy_mean_rel_error: float
    light_mean_rel_error: float
    precision: float
    recall: float
    f_measure: float
    total_time_ms: float
    latency_p95_ms: float


@dataclass
class ExperimentReport:
    spec: BenchmarkSpec
    methods: dict            # name -> MethodReport
    queries: dict            # "heavy"/"light"/"null" -> [(values, true count)]
    traces: dict             # name -> {"heavy": [...], "light": [...], "null": [...]}
    warnings: list = field(default_factory=list)


def exact_group_counts(ds: Dataset, attrs):
    """Exact counts over the cross-product of the attributes' domains."""
    sizes = [ds.schema.attribute(a).size for a in attrs]
    cols = [ds.schema.index_of(a) for a in attrs]
    flat = np.ravel_multi_index([ds.table[:, c] for c in cols], sizes)
    counts = np.bincount(flat, minlength=int(np.prod(sizes)))
    return counts.reshape(sizes)


def _pick_benchmark_groups(ds: Dataset, spec: BenchmarkSpec):
    """Heavy/light from exact counts; nulls sampled from truly absent cells."""
    counts = exact_group_counts(ds, spec.query_attrs)
    cells = sorted(np.ndindex(counts.shape))
    nonzero = [c for c in cells if counts[c] > 0]
    zero = [c for c in cells if counts[c] == 0]
    notes = []
    # Lexicographic tie-break at the heavy/light boundaries.
    heavy = sorted(nonzero, key=lambda c: (-counts[c], c))[: spec.heavy]
    light = sorted(nonzero, key=lambda c: (counts[c], c))[: spec.light]
    if len(heavy) < spec.heavy or len(light) < spec.light:
        notes.append(
            f"only {len(nonzero)} nonempty groups; heavy/light shrunk to "
            f"{len(heavy)}/{len(light)}"
        )
        warnings.warn(notes[-1])
    rng = np.random.default_rng(spec.seed)
    if len(zero) > spec.null:
        chosen = rng.choice(len(zero), size=spec.null, replace=False)
        null = [zero[i] for i in sorted(chosen)]
    else:
        null = zero
        if len(zero) < spec.null:
            notes.append(f"only {len(zero)} empty groups; null set shrunk")
            warnings.warn(notes[-1])
    return counts, heavy, light, null, notes


def make_summary_method(summary) -> Callable[[Predicate], float]:
    def method(pred: Predicate) -> float:
        return answer_count(summary, CountQuery(pred)).expectation
    return method


def make_sample_method(sample: SampleSummary) -> Callable[[Predicate], float]:
    def method(pred: Predicate) -> float:
        return sample_estimate(sample, pred)
    return method


def run_benchmark(ds: Dataset, methods: dict, spec: BenchmarkSpec) -> ExperimentReport:
    """Run every estimator over the heavy/light/null point-query sets.

    `methods` maps a display name to a callable Predicate -> float estimate.
    Group selection always uses exact counts, never estimates.
    """
    counts, heavy, light, null, notes = _pick_benchmark_groups(ds, spec)
    groups = {"heavy": heavy, "light": light, "null": null}
    queries = {
        kind: [(cell, float(counts[cell])) for cell in cells]
        for kind, cells in groups.items()
    }

    def cell_predicate(cell):
        return Predicate.of(
            **{a: Clause.point(int(v)) for a, v in zip(spec.query_attrs, cell)}
        )

    method_reports = {}
    traces = {}
    for name, method in methods.items():
        trace = {"heavy": [], "light": [], "null": []}
        latencies = []
        started = time.perf_counter()
        for kind, cells in groups.items():
            for cell in cells:
                t0 = time.perf_counter()
                estimate = method(cell_predicate(cell))
                latencies.append((time.perf_counter() - t0) * 1000.0)
                trace[kind].append(
                    {
                        "values": list(map(int, cell)),
                        "true": float(counts[cell]),
                        "estimate": estimate,
                    }
                )
        total_ms = (time.perf_counter() - started) * 1000.0
        precision, recall, f_measure = precision_recall_f(
            [t["estimate"] for t in trace["light"]],
            [t["estimate"] for t in trace["null"]],
        )
        method_reports[name] = MethodReport(
            heavy_mean_rel_error=_mean_rel_error(trace["heavy"]),
            light_mean_rel_error=_mean_rel_error(trace["light"]),
            precision=precision,
            recall=recall,
            f_measure=f_measure,
            total_time_ms=total_ms,
            latency_p95_ms=float(np.percentile(latencies, 95)) if latencies else 0.0,
        )
        traces[name] = trace
    return ExperimentReport(spec, method_reports, queries, traces, notes)


def standard_benchmark(ds: Dataset, spec: BenchmarkSpec, build_config=None,
                       rate: float = 0.01, strata_attrs=None):
    """The default method lineup: MaxEnt with and without 2D statistics,
    plus uniform and (optionally) stratified samples at the given rate.

    Returns (report, summaries) so callers can inspect the built models.
    """
    from dataclasses import replace

    from .pipeline import BuildConfig, build_summary

    config = build_config or BuildConfig()
    with_2d, _ = build_summary(ds, config)
    no_2d, _ = build_summary(ds, replace(config, selection=None))
    methods = {
        "maxent-2d": make_summary_method(with_2d),
        "maxent-no2d": make_summary_method(no_2d),
        "uniform-sample": make_sample_method(uniform_sample(ds, rate, spec.seed)),
    }
    if strata_attrs:
        methods["stratified-sample"] = make_sample_method(
            stratified_sample(ds, strata_attrs, rate, spec.seed)
        )
    report = run_benchmark(ds, methods, spec)
    return report, {"maxent-2d": with_2d, "maxent-no2d": no_2d}


def _mean_rel_error(trace) -> float:
    if not trace:
        return 0.0
    return float(
        np.mean([relative_error(t["true"], t["estimate"]) for t in trace])
    )


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "spec": {
            "query_attrs": list(report.spec.query_attrs),
            "heavy": report.spec.heavy,
            "light": report.spec.light,
            "null": report.spec.null,
            "seed": report.spec.seed,
        },
        "methods": {
            name: {
                "heavy_mean_rel_error": m.heavy_mean_rel_error,
                "light_mean_rel_error": m.light_mean_rel_error,
                "precision": m.precision,
                "recall": m.recall,
                "f_measure": m.f_measure,
                "total_time_ms": m.total_time_ms,
                "latency_p95_ms": m.latency_p95_ms,
            }
            for name, m in report.methods.items()
        },
        "warnings": report.warnings,
    }


def report_to_text(report: ExperimentReport) -> str:
    header = (
        f"{'method':24s} {'heavy err':>9s} {'light err':>9s} "
        f"{'prec':>6s} {'recall':>6s} {'F':>6s} {'p95 ms':>8s}"
    )
    lines = [header, "-" * len(header)]
    for name, m in report.methods.items():
        lines.append(
            f"{name:24s} {m.heavy_mean_rel_error:9.4f} {m.light_mean_rel_error:9.4f} "
            f"{m.precision:6.3f} {m.recall:6.3f} {m.f_measure:6.3f} "
            f"{m.latency_p95_ms:8.2f}"
        )
    for note in report.warnings:
        lines.append(f"note: {note}")
    return "\n".join(lines)


def dump_report(report: ExperimentReport, json_path=None, text_path=None):
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report_to_dict(report), fh, indent=2)
    if text_path:
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(report_to_text(report) + "\n")
