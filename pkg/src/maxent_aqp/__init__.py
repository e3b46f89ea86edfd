"""Approximate query processing over maximum-entropy data summaries.

A relation is summarized as (compressed polynomial, solved variables,
statistic set); count and group-by queries are answered in expectation by
re-evaluating the polynomial under query-derived zero sets.
"""

from .core import (
    AttributeMeta,
    BucketizerSpec,
    Clause,
    Dataset,
    Predicate,
    Schema,
    Statistic,
    StatisticSet,
    validate_statistic_set,
)
from .ingest import compute_1d_statistics, contingency_matrix, chi_squared, load_csv
from .pipeline import BuildConfig, build_summary
from .polynomial import (
    Assignment,
    CompressedPolynomial,
    build_compressed_naive,
    build_compressed_optimized,
    build_expanded,
)
from .query import CountQuery, GroupByQuery, answer_count, answer_groupby
from .solver import SolverConfig, Summary, solve
from .stat_select import SelectionConfig

__version__ = "0.1.0"
