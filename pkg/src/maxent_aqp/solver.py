"""Coordinate mirror-descent fit of the statistic variables.

Each variable alpha_j is updated in closed form so that its expected count
matches its target exactly while all other variables stay fixed; sweeping
all variables maximizes the concave dual

    dual(alpha) = sum_j s_j ln(alpha_j) - n ln(P(alpha)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import StatisticSet
from .polynomial import Assignment, CompressedPolynomial, partial_value


class ModelDegenerateError(RuntimeError):
    """P evaluated to a non-positive value; the model carries no mass."""


class InfeasibleStatisticError(RuntimeError):
    """A statistic has positive target but no monomial can carry its mass."""


@dataclass(frozen=True)
class SolverConfig:
    threshold: float = 1e-6
    max_sweeps: int = 30
    init: float = 1.0
    warm_start: bool = False

    def __post_init__(self):
        if self.threshold <= 0 or self.max_sweeps < 1:
            raise ValueError("threshold must be > 0 and max_sweeps >= 1")


@dataclass
class SolveDiagnostics:
    sweeps: int = 0
    converged: bool = False
    final_residual: float = math.inf
    max_residuals: list = field(default_factory=list)  # per sweep
    dual_values: list = field(default_factory=list)    # per sweep


class Summary:
    """The queryable artifact: polynomial, solved variables, statistics, n."""

    def __init__(self, poly: CompressedPolynomial, stats: StatisticSet,
                 alpha=None, diagnostics=None):
        self.poly = poly
        self.stats = stats
        self.schema = stats.schema
        if alpha is None:
            alpha = np.ones(len(stats), dtype=float)
            for st in stats:
                if st.target == 0:
                    alpha[st.id] = 0.0
        self.alpha = np.asarray(alpha, dtype=float)
        self.diagnostics = diagnostics or SolveDiagnostics()
        self._cache = None

    @property
    def n(self) -> int:
        return self.stats.n

    def assignment(self, zero_ids=frozenset()) -> Assignment:
        return Assignment(self.alpha, frozenset(zero_ids))

    def evaluate(self, zero_ids=frozenset()) -> float:
        return self.poly.evaluate(self.assignment(zero_ids), cache=self._cache)

    def partial(self, stat_id: int, zero_ids=frozenset()):
        return partial_value(self.poly, stat_id, self.assignment(zero_ids), cache=self._cache)

    def warm(self):
        self._cache = self.poly.warm_cache(self.alpha)

    def invalidate_cache(self):
        self._cache = None

    def clone(self) -> "Summary":
        """Independent copy sharing the immutable polynomial and statistics."""
        copy = Summary(self.poly, self.stats, alpha=self.alpha.copy(),
                       diagnostics=SolveDiagnostics(
                           sweeps=self.diagnostics.sweeps,
                           converged=self.diagnostics.converged,
                           final_residual=self.diagnostics.final_residual,
                           max_residuals=list(self.diagnostics.max_residuals),
                           dual_values=list(self.diagnostics.dual_values),
                       ))
        return copy

    def with_statistics(self, stats: StatisticSet) -> "Summary":
        """Same polynomial/alpha against replaced targets (for maintenance)."""
        return Summary(self.poly, stats, alpha=self.alpha.copy())


def expected_count(summary: Summary, stat_id: int) -> float:
    """E[count of statistic j] = n * alpha_j * dP/dalpha_j / P."""
    b, a = summary.partial(stat_id)
    alpha_j = summary.alpha[stat_id]
    p = alpha_j * a + b
    if p <= 0:
        raise ModelDegenerateError(f"P = {p} while computing expectation of {stat_id}")
    return summary.n * alpha_j * a / p


def update_alpha(summary: Summary, stat_id: int) -> float:
    """Closed-form coordinate update; returns the new alpha_j (not applied)."""
    s = summary.stats.stat(stat_id).target
    n = summary.n
    if s == 0:
        return 0.0
    if s >= n:
        # All mass sits in this statistic; its complements carry alpha = 0
        # and per-attribute scale freedom satisfies the constraint for any
        # positive value, so the current one is kept.
        return float(summary.alpha[stat_id])
    b, a = summary.partial(stat_id)
    if a == 0.0:
        raise InfeasibleStatisticError(
            f"statistic {stat_id} has target {s} but a zero polynomial coefficient"
        )
    return s * b / ((n - s) * a)


def constraint_residuals(summary: Summary):
    """(per-statistic |s_j - E_j|, max). Uses a warmed cache for speed."""
    cache = summary.poly.warm_cache(summary.alpha)
    assignment = summary.assignment()
    p = summary.poly.evaluate(assignment, cache=cache)
    if p <= 0:
        raise ModelDegenerateError(f"P = {p}")
    residuals = np.zeros(len(summary.stats))
    for st in summary.stats:
        _, a = partial_value(summary.poly, st.id, assignment, cache=cache)
        expected = summary.n * summary.alpha[st.id] * a / p
        residuals[st.id] = abs(st.target - expected)
    return residuals, float(residuals.max(initial=0.0))


def dual_value(summary: Summary) -> float:
    """sum_j s_j ln(alpha_j) - n ln(P); 0 * ln(0) = 0 by convention."""
    p = summary.evaluate()
    if p <= 0:
        raise ModelDegenerateError(f"P = {p}")
    total = -summary.n * math.log(p)
    for st in summary.stats:
        if st.target > 0:
            alpha_j = summary.alpha[st.id]
            if alpha_j <= 0:
                return -math.inf
            total += st.target * math.log(alpha_j)
    return total


def _sweep_order(stats: StatisticSet) -> list:
    """All 1D statistics attribute-major, then multiD statistics pair-major."""
    order = []
    for meta in stats.schema:
        order.extend(st.id for st in stats.by_attr.get(meta.name, ()))
    for pair in stats.pair_keys:
        order.extend(st.id for st in stats.by_pair[pair])
    return order


def solve(summary: Summary, config: SolverConfig = SolverConfig()) -> Summary:
    """Sweep coordinate updates until the max residual drops below threshold.

    Non-convergence within max_sweeps is flagged in the diagnostics, never
    raised: the best iterate stays queryable.
    """
    summary.invalidate_cache()
    if not config.warm_start:
        summary.alpha = np.full(len(summary.stats), float(config.init))
    for st in summary.stats:
        if st.target == 0:
            summary.alpha[st.id] = 0.0
        elif summary.alpha[st.id] == 0.0:
            # Unpinned (e.g. a zero statistic that gained mass): restart at
            # the neutral value so the closed-form update can move it.
            summary.alpha[st.id] = float(config.init)

    order = _sweep_order(summary.stats)
    diag = SolveDiagnostics()
    for sweep in range(1, config.max_sweeps + 1):
        for stat_id in order:
            if summary.stats.stat(stat_id).target > 0:
                summary.alpha[stat_id] = update_alpha(summary, stat_id)
        diag.sweeps = sweep
        _, max_residual = constraint_residuals(summary)
        diag.max_residuals.append(max_residual)
        diag.dual_values.append(dual_value(summary))
        diag.final_residual = max_residual
        if max_residual < config.threshold:
            diag.converged = True
            break
    summary.diagnostics = diag
    summary.warm()
    return summary
