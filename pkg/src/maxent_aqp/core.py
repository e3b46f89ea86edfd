"""Schema, bucketized domains, predicates, and statistic sets.

Everything here is immutable after construction: the domain order of an
attribute defines matrix/index semantics for the rest of the engine, so it
must never change once a dataset has been bucketized against it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np


class DomainError(ValueError):
    """A raw value cannot be mapped into an attribute's bucketized domain."""


class ConfigError(ValueError):
    """A schema/bucketizer configuration is malformed or inconsistent."""


@dataclass(frozen=True)
class BucketizerSpec:
    """How raw values of one attribute map to bucket indices.

    numeric: equi-width buckets over [lo, hi]; out-of-range values clamp
    into the edge buckets. categorical: pass-through on a fixed label list,
    optionally keeping only the top-k labels with an overflow bucket.
    """

    kind: str  # "numeric" | "categorical"
    lo: float = 0.0
    hi: float = 1.0
    buckets: int = 1
    top_k: Optional[int] = None
    overflow_label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("numeric", "categorical"):
            raise ConfigError(f"unknown bucketizer kind {self.kind!r}")
        if self.kind == "numeric":
            if not (self.hi > self.lo):
                raise ConfigError("numeric bucketizer needs hi > lo")
            if self.buckets < 1:
                raise ConfigError("numeric bucketizer needs >= 1 bucket")


@dataclass(frozen=True)
class AttributeMeta:
    """One attribute: its name, kind, bucketizer, and ordered bucket domain."""

    name: str
    kind: str  # "numeric" | "categorical"
    bucketizer: BucketizerSpec
    domain: tuple  # ordered bucket labels

    def __post_init__(self):
        if len(set(self.domain)) != len(self.domain):
            raise ConfigError(f"attribute {self.name}: duplicate domain labels")
        if not self.domain:
            raise ConfigError(f"attribute {self.name}: empty domain")

    @property
    def size(self) -> int:
        return len(self.domain)

    def label_index(self, label) -> int:
        try:
            return self.domain.index(label)
        except ValueError:
            raise DomainError(f"attribute {self.name}: unknown label {label!r}")


def numeric_bucket_labels(spec: BucketizerSpec) -> tuple:
    """Human-readable labels for equi-width buckets, one per bucket."""
    edges = np.linspace(spec.lo, spec.hi, spec.buckets + 1)
    return tuple(f"[{edges[i]:g},{edges[i + 1]:g})" for i in range(spec.buckets))


def bucketize_value(meta: AttributeMeta, raw) -> int:
    """Map a raw scalar/label to its bucket index in [0, N_i).

    Numeric values outside [lo, hi] clamp into the edge buckets; the upper
    edge itself falls in the last bucket. Unknown categorical labels go to
    the overflow bucket when configured, otherwise raise DomainError.
    """
    spec = meta.bucketizer
    if meta.kind == "numeric":
        x = float(raw)
        width = (spec.hi - spec.lo) / spec.buckets
        idx = int((x - spec.lo) // width)
        return min(max(idx, 0), spec.buckets - 1)
    label = raw
    if label in meta.domain:
        return meta.domain.index(label)
    if spec.overflow_label is not None:
        return meta.domain.index(spec.overflow_label)
    raise DomainError(f"attribute {meta.name}: unknown label {label!r}")


@dataclass(frozen=True)
class Schema:
    attributes: tuple  # tuple[AttributeMeta, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate attribute names")

    @property
    def names(self) -> tuple:
        return tuple(a.name for a in self.attributes)

    def __iter__(self):
        return iter(self.attributes)

    def __len__(self):
        return len(self.attributes)

    def attribute(self, name: str) -> AttributeMeta:
        for a in self.attributes:
            if a.name == name:
                return a
        raise KeyError(name)

    def index_of(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise KeyError(name)

    def tuple_space_size(self) -> int:
        size = 1
        for a in self.attributes:
            size *= a.size
        return size


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

ANY = None  # sentinel: clause accepting every index


@dataclass(frozen=True)
class Clause:
    """Single-attribute predicate: any, point, inclusive range, or index set."""

    kind: str  # "any" | "point" | "range" | "set"
    lo: int = 0
    hi: int = 0
    members: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in ("any", "point", "range", "set"):
            raise ValueError(f"unknown clause kind {self.kind!r}")
        if self.kind == "range" and self.lo > self.hi:
            raise ValueError(f"range clause with lo {self.lo} > hi {self.hi}")

    @staticmethod
    def any_() -> "Clause":
        return Clause("any")

    @staticmethod
    def point(idx: int) -> "Clause":
        return Clause("point", lo=idx, hi=idx)

    @staticmethod
    def range(lo: int, hi: int) -> "Clause":
        return Clause("range", lo=lo, hi=hi)

    @staticmethod
    def of(indices: Iterable[int]) -> "Clause":
        return Clause("set", members=frozenset(indices))

    @property
    def is_any(self) -> bool:
        return self.kind == "any"

    def indices(self, size: int) -> frozenset:
        """The set of accepted bucket indices for a domain of `size` values."""
        if self.kind == "any":
            return frozenset(range(size))
        if self.kind == "point":
            return frozenset((self.lo,))
        if self.kind == "range":
            return frozenset(range(self.lo, min(self.hi, size - 1) + 1))
        return self.members

    def accepts(self, idx: int) -> bool:
        if self.kind == "any":
            return True
        if self.kind == "point":
            return idx == self.lo
        if self.kind == "range":
            return self.lo <= idx <= self.hi
        return idx in self.members

    def mask(self, column: np.ndarray) -> np.ndarray:
        if self.kind == "any":
            return np.ones(len(column), dtype=bool)
        if self.kind == "point":
            return column == self.lo
        if self.kind == "range":
            return (column >= self.lo) & (column <= self.hi)
        return np.isin(column, sorted(self.members))


def clause_implies(stat_clause: Clause, query_clause: Clause, size: int) -> bool:
    """True iff every index accepted by `stat_clause` is accepted by `query_clause`."""
    if query_clause.is_any:
        return True
    return stat_clause.indices(size) <= query_clause.indices(size)


@dataclass(frozen=True)
class Predicate:
    """Conjunction of per-attribute clauses; missing attributes mean `any`."""

    clauses: tuple = ()  # tuple[(attr_name, Clause), ...]

    @staticmethod
    def of(**clauses: Clause) -> "Predicate":
        return Predicate(tuple(sorted(clauses.items())))

    @staticmethod
    def true() -> "Predicate":
        return Predicate(())

    def as_dict(self) -> dict:
        return dict(self.clauses)

    def clause_for(self, attr: str) -> Clause:
        return self.as_dict().get(attr, Clause.any_())

    @property
    def attrs(self) -> tuple:
        return tuple(name for name, cl in self.clauses if not cl.is_any)

    def matches(self, schema: Schema, row: Sequence[int]) -> bool:
        for name, cl in self.clauses:
            if not cl.accepts(row[schema.index_of(name)]):
                return False
        return True

    def conjoin(self, other: "Predicate", schema: Schema) -> "Predicate":
        merged = dict(self.clauses)
        for name, cl in other.clauses:
            if name in merged:
                size = schema.attribute(name).size
                both = merged[name].indices(size) & cl.indices(size)
                merged[name] = Clause.of(both)
            else:
                merged[name] = cl
        return Predicate(tuple(sorted(merged.items())))


def predicate_matches(pred: Predicate, schema: Schema, row: Sequence[int]) -> bool:
    return pred.matches(schema, row)


def predicate_mask(pred: Predicate, schema: Schema, table: np.ndarray) -> np.ndarray:
    """Vectorized predicate evaluation over a bucketized tuple table."""
    mask = np.ones(len(table), dtype=bool)
    for name, cl in pred.clauses:
        if not cl.is_any:
            mask &= cl.mask(table[:, schema.index_of(name)])
    return mask


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Statistic:
    """A count constraint (predicate, target) over the relation.

    1D statistics are single-attribute point constraints; multiD statistics
    are rectangles (one non-any clause per attribute in their attribute set).
    """

    id: int
    predicate: Predicate
    target: float

    @property
    def attrs(self) -> tuple:
        return self.predicate.attrs

    @property
    def is_1d(self) -> bool:
        return len(self.attrs) == 1

    @property
    def pair_key(self) -> tuple:
        """Canonical key for the statistic's attribute set (multiD grouping)."""
        return tuple(sorted(self.attrs))

    def index_sets(self, schema: Schema) -> dict:
        """attr -> accepted index set, for the non-any clauses."""
        out = {}
        for name, cl in self.predicate.clauses:
            if not cl.is_any:
                out[name] = cl.indices(schema.attribute(name).size)
        return out


class StatisticSet:
    """All statistics of a summary: complete 1D per attribute plus multiD groups."""

    def __init__(self, schema: Schema, statistics: Sequence[Statistic], n: int):
        self.schema = schema
        self.statistics = tuple(statistics)
        self.n = int(n)
        # Statistic ids double as positions in value vectors, so they must
        # be exactly 0..k-1 in list order.
        for pos, st in enumerate(self.statistics):
            if st.id != pos:
                raise ConfigError(f"statistic ids must be dense: id {st.id} at position {pos}")
        self.one_d = {}       # (attr, value_index) -> Statistic
        self.by_attr = {}     # attr -> list[Statistic] (1D, domain order)
        self.by_pair = {}     # pair_key -> list[Statistic] (multiD)
        for st in self.statistics:
            if st.is_1d:
                attr = st.attrs[0]
                cl = st.predicate.clause_for(attr)
                if cl.kind != "point":
                    raise ConfigError(f"1D statistic {st.id} must be a point clause")
                self.one_d[(attr, cl.lo)] = st
                self.by_attr.setdefault(attr, []).append(st)
            else:
                self.by_pair.setdefault(st.pair_key, []).append(st)
        for attr in self.by_attr:
            self.by_attr[attr].sort(key=lambda s: s.predicate.clause_for(attr).lo)

    def __len__(self):
        return len(self.statistics)

    def __iter__(self):
        return iter(self.statistics)

    def stat(self, stat_id: int) -> Statistic:
        return self.statistics[stat_id]

    @property
    def pair_keys(self) -> tuple:
        return tuple(sorted(self.by_pair))

    @property
    def num_pairs(self) -> int:
        """B_a: number of distinct multiD attribute sets."""
        return len(self.by_pair)

    def with_targets(self, targets: Mapping[int, float], n: int) -> "StatisticSet":
        """Copy with some statistic targets replaced (predicates unchanged)."""
        stats = [
            Statistic(s.id, s.predicate, targets.get(s.id, s.target))
            for s in self.statistics
        ]
        return StatisticSet(self.schema, stats, n)


def validate_statistic_set(stats: StatisticSet) -> list:
    """Check 1D completeness, per-pair disjointness, and counting identities.

    Returns a list of human-readable violations; empty means the set is valid.
    """
    violations = []
    schema = stats.schema
    n = stats.n
    for attr in schema:
        stats_i = [stats.one_d.get((attr.name, v)) for v in range(attr.size)]
        missing = [v for v, s in enumerate(stats_i) if s is None]
        if missing:
            violations.append(
                f"attribute {attr.name}: missing 1D statistics for indices {missing}"
            )
            continue
        total = sum(s.target for s in stats_i)
        if total != n:
            violations.append(
                f"attribute {attr.name}: 1D targets sum to {total}, expected n={n}"
            )
    for st in stats:
        if not (0 <= st.target <= n):
            violations.append(f"statistic {st.id}: target {st.target} outside [0, {n}]")
    for pair, group in stats.by_pair.items():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                if _rectangles_overlap(group[i], group[j], schema):
                    violations.append(
                        f"pair {pair}: statistics {group[i].id} and {group[j].id} overlap"
                    )
    return violations


def _rectangles_overlap(a: Statistic, b: Statistic, schema: Schema) -> bool:
    sets_a = a.index_sets(schema)
    sets_b = b.index_sets(schema)
    for attr in set(sets_a) & set(sets_b):
        if not (sets_a[attr] & sets_b[attr]):
            return False
    return True


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    """A bucketized relation: each cell holds the bucket index of its value."""

    schema: Schema
    table: np.ndarray  # shape (n, m), integer bucket indices
    dropped_rows: int = 0
    clamped_values: int = 0

    def __post_init__(self):
        if self.table.ndim != 2 or self.table.shape[1] != len(self.schema):
            raise ConfigError("table shape does not match schema arity")
        for i, attr in enumerate(self.schema):
            if len(self.table) and self.table[:, i].max() >= attr.size:
                raise ConfigError(f"attribute {attr.name}: bucket index out of range")

    @property
    def n(self) -> int:
        return len(self.table)


# ---------------------------------------------------------------------------
# Schema config file (JSON)
# ---------------------------------------------------------------------------
#
# Format:
# {"attributes": [
#    {"name": "dist", "kind": "numeric", "min": 0, "max": 100, "buckets": 10},
#    {"name": "city", "kind": "categorical", "domain": ["SEA", "PDX"],
#     "top_k": 2, "overflow": "Other"}]}
#
# Categorical attributes may omit "domain"; it is then inferred from data at
# ingestion time (sorted unique labels, optionally reduced to top_k).

def schema_config_to_dict(specs: Sequence[tuple]) -> dict:
    out = []
    for name, spec in specs:
        entry = {"name": name, "kind": spec.kind}
        if spec.kind == "numeric":
            entry.update({"min": spec.lo, "max": spec.hi, "buckets": spec.buckets})
        else:
            if spec.top_k is not None:
                entry["top_k"] = spec.top_k
            if spec.overflow_label is not None:
                entry["overflow"] = spec.overflow_label
        out.append(entry)
    return {"attributes": out}


def parse_schema_config(doc: dict) -> list:
    """Parse a schema config dict into [(name, BucketizerSpec, domain|None)]."""
    if "attributes" not in doc:
        raise ConfigError("schema config missing 'attributes'")
    parsed = []
    for entry in doc["attributes"]:
        name = entry["name"]
        kind = entry["kind"]
        if kind == "numeric":
            spec = BucketizerSpec(
                "numeric",
                lo=float(entry["min"]),
                hi=float(entry["max"]),
                buckets=int(entry["buckets"]),
            )
            domain = numeric_bucket_labels(spec)
        elif kind == "categorical":
            spec = BucketizerSpec(
                "categorical",
                top_k=entry.get("top_k"),
                overflow_label=entry.get("overflow"),
            )
            domain = tuple(entry["domain"]) if "domain" in entry else None
        else:
            raise ConfigError(f"attribute {name}: unknown kind {kind!r}")
        parsed.append((name, spec, domain))
    return parsed


def load_schema_config(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_schema_config(json.load(fh))
