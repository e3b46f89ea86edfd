"""HTTP facade and on-disk registry for summaries.

Handlers are thin adapters over the engine modules: requests are parsed,
dispatched to the query/maintenance functions, and module outputs are
serialized back. Builds run asynchronously (solving can take a while) and
are observed through the status endpoint.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from .core import ConfigError, DomainError
from .ingest import load_csv
from .maintenance import LiveSummary, TupleDelta, UpdateRejectedError
from .pipeline import BuildConfig, build_summary
from .query import (
    CountQuery,
    GroupByCapError,
    GroupByQuery,
    answer_count,
    answer_groupby,
    answer_to_json,
    groupby_rows_to_json,
    query_from_json,
    _resolve_value,
)
from .serialize import SerializationError, load_summary, serialize_summary

DATA_DIR_ENV = "MAXENT_AQP_DATA"


@dataclass
class RegistryEntry:
    id: str
    name: str
    created_at: float
    state: str                 # building | ready | failed
    live: Optional[LiveSummary] = None
    error: Optional[str] = None
    config: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SummaryRegistry:
    """id -> live summary plus metadata, persisted one JSON file per summary."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._entries = {}
        self._lock = threading.Lock()
        self._load_existing()

    def _path(self, summary_id: str) -> Path:
        return self.data_dir / f"{summary_id}.json"

    def _load_existing(self):
        for path in sorted(self.data_dir.glob("*.json")):
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    doc = json.load(fh)
                summary = load_summary(doc["summary"])
                meta = doc.get("meta", {})
                entry = RegistryEntry(
                    id=path.stem,
                    name=meta.get("name", path.stem),
                    created_at=meta.get("created_at", path.stat().st_mtime),
                    state="ready",
                    live=LiveSummary(summary),
                    config=meta.get("config", {}),
                )
                self._entries[entry.id] = entry
            except (SerializationError, json.JSONDecodeError, KeyError):
                continue  # skip unreadable artifacts, never fail startup

    def persist(self, entry: RegistryEntry):
        doc = {
            "meta": {
                "name": entry.name,
                "created_at": entry.created_at,
                "config": entry.config,
            },
            "summary": serialize_summary(entry.live.snapshot),
        }
        with open(self._path(entry.id), "w", encoding="utf-8") as fh:
            json.dump(doc, fh)

    def list(self):
        with self._lock:
            return list(self._entries.values())

    def get(self, summary_id: str) -> RegistryEntry:
        with self._lock:
            entry = self._entries.get(summary_id)
        if entry is None:
            raise KeyError(summary_id)
        return entry

    def add(self, entry: RegistryEntry):
        with self._lock:
            self._entries[entry.id] = entry

    def register_summary(self, summary, name: str, config: dict = None) -> RegistryEntry:
        entry = RegistryEntry(
            id=uuid.uuid4().hex[:12],
            name=name,
            created_at=time.time(),
            state="ready",
            live=LiveSummary(summary),
            config=config or {},
        )
        self.add(entry)
        self.persist(entry)
        return entry

    def start_build(self, name: str, dataset_path: str, schema_config,
                    build_config: BuildConfig) -> RegistryEntry:
        entry = RegistryEntry(
            id=uuid.uuid4().hex[:12],
            name=name,
            created_at=time.time(),
            state="building",
            config=build_config.to_dict(),
        )
        self.add(entry)

        def job():
            try:
                ds = load_csv(dataset_path, schema_config)
                summary, _ = build_summary(ds, build_config)
                entry.live = LiveSummary(summary, build_config)
                entry.state = "ready"
                self.persist(entry)
            except Exception as exc:  # job boundary: surface via /status
                entry.state = "failed"
                entry.error = f"{type(exc).__name__}: {exc}"

        threading.Thread(target=job, daemon=True).start()
        return entry


def _entry_or_404(registry: SummaryRegistry, summary_id: str) -> RegistryEntry:
    try:
        return registry.get(summary_id)
    except KeyError:
        raise HTTPException(status_code=404, detail=f"unknown summary {summary_id!r}")


def _ready_or_409(entry: RegistryEntry):
    if entry.state == "building":
        raise HTTPException(status_code=409, detail="summary is still building")
    if entry.state == "failed":
        raise HTTPException(status_code=409, detail=f"build failed: {entry.error}")


def create_app(registry: SummaryRegistry) -> FastAPI:
    app = FastAPI(title="maxent-aqp")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/summaries")
    def list_summaries():
        out = []
        for entry in registry.list():
            item = {
                "id": entry.id,
                "name": entry.name,
                "createdAt": entry.created_at,
                "state": entry.state,
            }
            if entry.live is not None:
                item["n"] = entry.live.snapshot.n
            out.append(item)
        return out

    @app.post("/summaries", status_code=202)
    def build(body: dict):
        try:
            from .core import parse_schema_config

            name = body.get("name", "summary")
            dataset = body["dataset"]
            schema_config = parse_schema_config(body["schema"])
            build_config = BuildConfig.from_dict(body.get("config", {}))
        except (KeyError, ConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        entry = registry.start_build(name, dataset, schema_config, build_config)
        return {"id": entry.id, "state": entry.state}

    @app.get("/summaries/{summary_id}/schema")
    def schema(summary_id: str):
        entry = _entry_or_404(registry, summary_id)
        _ready_or_409(entry)
        summary = entry.live.snapshot
        attributes = [
            {
                "name": meta.name,
                "kind": meta.kind,
                "domain": list(meta.domain),
                "oneDStatistics": meta.size,
            }
            for meta in summary.schema
        ]
        pairs = [
            {"attributes": list(pair), "statistics": len(group)}
            for pair, group in sorted(summary.stats.by_pair.items())
        ]
        return {"n": summary.n, "attributes": attributes, "pairs": pairs}

    @app.post("/summaries/{summary_id}/query")
    def query(summary_id: str, body: dict):
        entry = _entry_or_404(registry, summary_id)
        _ready_or_409(entry)
        summary = entry.live.snapshot
        try:
            parsed = query_from_json(body, summary.schema)
        except (KeyError, ValueError, DomainError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if isinstance(parsed, GroupByQuery):
            raise HTTPException(
                status_code=400, detail="use /groupby for group-by queries"
            )
        return answer_to_json(answer_count(summary, parsed))

    @app.post("/summaries/{summary_id}/groupby")
    def groupby(summary_id: str, body: dict):
        entry = _entry_or_404(registry, summary_id)
        _ready_or_409(entry)
        summary = entry.live.snapshot
        try:
            parsed = query_from_json(body, summary.schema)
            if isinstance(parsed, CountQuery):
                raise ValueError("groupBy attribute list is required")
            rows = answer_groupby(summary, parsed)
        except GroupByCapError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except (KeyError, ValueError, DomainError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"rows": groupby_rows_to_json(rows, parsed.group_by, summary.schema)}

    @app.post("/summaries/{summary_id}/updates")
    def updates(summary_id: str, body: dict):
        entry = _entry_or_404(registry, summary_id)
        _ready_or_409(entry)
        if not entry.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="maintenance in progress")
        try:
            summary = entry.live.snapshot
            try:
                op = body["op"]
                raw = body["tuple"]
                values = tuple(
                    _resolve_value(meta, raw[meta.name]) for meta in summary.schema
                )
            except (KeyError, DomainError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            if op not in ("insert", "delete"):
                raise HTTPException(status_code=400, detail=f"unknown op {op!r}")
            delta = TupleDelta(values, 1 if op == "insert" else -1)
            try:
                entry.live.apply(delta)
            except UpdateRejectedError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            if body.get("refresh", True):
                entry.live.refresh()
                registry.persist(entry)
            return {
                "n": entry.live.snapshot.n,
                "pendingDeltas": entry.live.pending_deltas,
            }
        finally:
            entry.lock.release()

    @app.get("/summaries/{summary_id}/status")
    def status(summary_id: str):
        entry = _entry_or_404(registry, summary_id)
        out = {"id": entry.id, "state": entry.state}
        if entry.state == "failed":
            out["error"] = entry.error
        if entry.live is not None:
            diag = entry.live.snapshot.diagnostics
            out.update(
                {
                    "sweeps": diag.sweeps,
                    "converged": diag.converged,
                    "finalResidual": diag.final_residual,
                    "pendingDeltas": entry.live.pending_deltas,
                    "updateCounter": entry.live.policy.counter,
                }
            )
        return out

    return app


def default_data_dir() -> str:
    return os.environ.get(DATA_DIR_ENV, os.path.join(os.getcwd(), "summaries"))


def serve(data_dir=None, host="127.0.0.1", port=8000):
    import uvicorn

    registry = SummaryRegistry(data_dir or default_data_dir())
    uvicorn.run(create_app(registry), host=host, port=port)
