"""End-to-end summary construction: statistics -> polynomial -> solve."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .core import ConfigError, Dataset, StatisticSet, validate_statistic_set
from .ingest import compute_1d_statistics
from .polynomial import build_compressed_naive, build_compressed_optimized
from .solver import SolverConfig, Summary, solve
from .stat_select import SelectionConfig, select_statistics


@dataclass(frozen=True)
class BuildConfig:
    selection: Optional[SelectionConfig] = field(default_factory=SelectionConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    builder: str = "optimized"  # optimized | naive

    def to_dict(self) -> dict:
        doc = {
            "solver": {
                "threshold": self.solver.threshold,
                "max_sweeps": self.solver.max_sweeps,
            },
            "builder": self.builder,
        }
        if self.selection is not None:
            doc["selection"] = self.selection.to_dict()
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "BuildConfig":
        selection = None
        if "selection" in doc and doc["selection"] is not None:
            selection = SelectionConfig.from_dict(doc["selection"])
        solver_doc = doc.get("solver", {})
        return BuildConfig(
            selection=selection,
            solver=SolverConfig(
                threshold=float(solver_doc.get("threshold", 1e-6)),
                max_sweeps=int(solver_doc.get("max_sweeps", 30)),
            ),
            builder=doc.get("builder", "optimized"),
        )

    @staticmethod
    def load(path) -> "BuildConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return BuildConfig.from_dict(json.load(fh))


def build_statistic_set(ds: Dataset, config: BuildConfig):
    """1D statistics for every attribute value plus selected multiD ones."""
    stats = compute_1d_statistics(ds)
    report = None
    if config.selection is not None and config.selection.pair_budget > 0 and len(ds.schema) >= 2:
        multi, report = select_statistics(ds, config.selection, start_id=len(stats))
        stats.extend(multi)
    return StatisticSet(ds.schema, stats, ds.n), report


def build_summary(ds: Dataset, config: BuildConfig = BuildConfig()):
    """Full pipeline; returns (solved Summary, selection report)."""
    stats, report = build_statistic_set(ds, config)
    violations = validate_statistic_set(stats)
    if violations:
        raise ConfigError("invalid statistic set: " + "; ".join(violations))
    if config.builder == "naive":
        poly = build_compressed_naive(stats)
    elif config.builder == "optimized":
        poly = build_compressed_optimized(stats)
    else:
        raise ConfigError(f"unknown builder {config.builder!r}")
    summary = solve(Summary(poly, stats), config.solver)
    return summary, report
