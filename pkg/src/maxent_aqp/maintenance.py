"""Tuple-level inserts/deletes against a live summary.

Deltas adjust statistic targets immediately; re-solving is deferred and
batched. Readers always see a whole, previously solved snapshot — the live
summary is swapped atomically after each re-solve or rebuild.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace

from .core import StatisticSet
from .pipeline import BuildConfig, build_summary
from .solver import SolverConfig, Summary, solve


class UpdateRejectedError(ValueError):
    """A delete would drive a statistic target or the row count below zero."""


@dataclass(frozen=True)
class TupleDelta:
    values: tuple  # bucket indices, one per schema attribute
    sign: int      # +1 insert, -1 delete

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


@dataclass
class RebuildPolicy:
    kind: str = "update-threshold"  # update-threshold | manual
    threshold: int = 100
    counter: int = 0

    def __post_init__(self):
        if self.kind == "update-threshold" and self.threshold < 1:
            raise ValueError("rebuild threshold must be >= 1")


def matched_statistics(stats: StatisticSet, delta: TupleDelta):
    return [
        st for st in stats if st.predicate.matches(stats.schema, delta.values)
    ]


def apply_update(stats: StatisticSet, delta: TupleDelta) -> StatisticSet:
    """New statistic set with targets shifted by the delta; predicates fixed."""
    matched = matched_statistics(stats, delta)
    if delta.sign < 0:
        if stats.n < 1:
            raise UpdateRejectedError("delete against an empty relation")
        short = [st.id for st in matched if st.target < 1]
        if short:
            raise UpdateRejectedError(
                f"delete would drive statistics {short} below zero"
            )
    targets = {st.id: st.target + delta.sign for st in matched}
    return stats.with_targets(targets, stats.n + delta.sign)


def update_params(summary: Summary, stats: StatisticSet,
                  config: SolverConfig = SolverConfig()) -> Summary:
    """Warm-start re-solve against updated targets; the input stays intact."""
    fresh = summary.with_statistics(stats)
    return solve(fresh, replace(config, warm_start=True))


def time_to_rebuild(policy: RebuildPolicy) -> bool:
    if policy.kind == "manual":
        return False
    return policy.counter >= policy.threshold


def rebuild(dataset, config: BuildConfig = BuildConfig()) -> Summary:
    """Full pipeline from scratch: selection, build, cold solve."""
    summary, _ = build_summary(dataset, config)
    return summary


class LiveSummary:
    """Single-writer wrapper: queued deltas, batched re-solves, snapshots.

    Queries go through `snapshot`, which is replaced wholesale — a reader
    holding a reference keeps a consistent (polynomial, alpha, targets) view
    for its whole query.
    """

    def __init__(self, summary: Summary, build_config: BuildConfig = BuildConfig(),
                 policy: RebuildPolicy = None):
        self._snapshot = summary
        self._staged = summary.stats
        self._pending = 0
        self.build_config = build_config
        self.policy = policy or RebuildPolicy(kind="manual")
        self._writer = threading.Lock()

    @property
    def snapshot(self) -> Summary:
        return self._snapshot

    @property
    def pending_deltas(self) -> int:
        return self._pending

    def apply(self, delta: TupleDelta):
        with self._writer:
            self._staged = apply_update(self._staged, delta)
            self._pending += 1
            self.policy.counter += 1

    def refresh(self, solver_config: SolverConfig = None) -> Summary:
        """Re-solve against all staged deltas and swap the snapshot."""
        with self._writer:
            if self._pending == 0:
                return self._snapshot
            config = solver_config or self.build_config.solver
            fresh = update_params(self._snapshot, self._staged, config)
            self._snapshot = fresh
            self._pending = 0
            return fresh

    def rebuild_from(self, dataset) -> Summary:
        with self._writer:
            fresh = rebuild(dataset, self.build_config)
            self._snapshot = fresh
            self._staged = fresh.stats
            self._pending = 0
            self.policy.counter = 0
            return fresh
