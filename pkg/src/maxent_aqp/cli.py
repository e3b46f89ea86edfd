"""Command-line entry points: build, query, groupby, update, eval, serve."""

from __future__ import annotations

import json
import sys

import click

from .core import parse_schema_config
from .evalkit import (
    BenchmarkSpec,
    dump_report,
    report_to_text,
    standard_benchmark,
)
from .ingest import load_csv
from .maintenance import TupleDelta, apply_update, update_params
from .pipeline import BuildConfig, build_summary
from .query import (
    CountQuery,
    GroupByQuery,
    answer_count,
    answer_groupby,
    answer_to_json,
    groupby_rows_to_json,
    query_from_json,
    _resolve_value,
)
from .serialize import read_summary, save_summary


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


@click.group()
def main():
    """Approximate query processing over maximum-entropy summaries."""


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True), help="CSV input")
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True),
              help="schema config JSON")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="build config JSON (selection + solver)")
@click.option("--out", required=True, type=click.Path(), help="summary output path")
def build(data, schema_path, config_path, out):
    """Build and solve a summary from a CSV file."""
    schema_config = parse_schema_config(_load_json(schema_path))
    build_config = BuildConfig.load(config_path) if config_path else BuildConfig()
    ds = load_csv(data, schema_config)
    summary, _ = build_summary(ds, build_config)
    save_summary(summary, out)
    diag = summary.diagnostics
    click.echo(
        f"built summary over n={summary.n} rows: {len(summary.stats)} statistics, "
        f"{diag.sweeps} sweeps, residual {diag.final_residual:.3g}"
        + ("" if diag.converged else " (NOT converged)")
    )


def _parse_query_arg(query_path, query_json):
    if query_json:
        return json.loads(query_json)
    if query_path:
        return _load_json(query_path)
    raise click.UsageError("provide --query FILE or --json STRING")


@main.command()
@click.option("--summary", "summary_path", required=True, type=click.Path(exists=True))
@click.option("--query", "query_path", type=click.Path(exists=True))
@click.option("--json", "query_json", help="inline query JSON")
def query(summary_path, query_path, query_json):
    """Answer a count query: {"clauses": [{"attr", "op", "value"}]}."""
    summary = read_summary(summary_path)
    parsed = query_from_json(_parse_query_arg(query_path, query_json), summary.schema)
    if isinstance(parsed, GroupByQuery):
        raise click.UsageError("query has groupBy; use the groupby command")
    click.echo(json.dumps(answer_to_json(answer_count(summary, parsed))))


@main.command()
@click.option("--summary", "summary_path", required=True, type=click.Path(exists=True))
@click.option("--query", "query_path", type=click.Path(exists=True))
@click.option("--json", "query_json", help="inline query JSON")
def groupby(summary_path, query_path, query_json):
    """Answer a group-by query: {"groupBy": [...], "clauses": [...]}."""
    summary = read_summary(summary_path)
    parsed = query_from_json(_parse_query_arg(query_path, query_json), summary.schema)
    if isinstance(parsed, CountQuery):
        raise click.UsageError("groupBy attribute list is required")
    rows = answer_groupby(summary, parsed)
    click.echo(
        json.dumps({"rows": groupby_rows_to_json(rows, parsed.group_by, summary.schema)})
    )


@main.command()
@click.option("--summary", "summary_path", required=True, type=click.Path(exists=True))
@click.option("--update", "update_path", type=click.Path(exists=True))
@click.option("--json", "update_json", help='inline {"tuple": {...}, "op": "insert"}')
@click.option("--out", type=click.Path(), help="output path (default: in place)")
def update(summary_path, update_path, update_json, out):
    """Apply a tuple insert/delete and re-solve with a warm start."""
    doc = _parse_query_arg(update_path, update_json)
    summary = read_summary(summary_path)
    values = tuple(
        _resolve_value(meta, doc["tuple"][meta.name]) for meta in summary.schema
    )
    sign = {"insert": 1, "delete": -1}[doc["op"]]
    stats = apply_update(summary.stats, TupleDelta(values, sign))
    fresh = update_params(summary, stats)
    save_summary(fresh, out or summary_path)
    click.echo(
        f"applied {doc['op']}; n={fresh.n}, re-solved in "
        f"{fresh.diagnostics.sweeps} sweeps"
    )


@main.command(name="eval")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="benchmark config JSON")
@click.option("--json-out", type=click.Path(), help="write the JSON report here")
def eval_cmd(config_path, json_out):
    """Run the heavy/light/null benchmark described by a config file.

    Config: {"dataset": csv, "schema": {...}, "queryAttrs": [...],
             "heavy": 100, "light": 100, "null": 200, "seed": 0,
             "sampleRate": 0.01, "strataAttrs": [...], "build": {...}}
    """
    doc = _load_json(config_path)
    schema_config = parse_schema_config(doc["schema"])
    ds = load_csv(doc["dataset"], schema_config)
    spec = BenchmarkSpec(
        query_attrs=tuple(doc["queryAttrs"]),
        heavy=doc.get("heavy", 100),
        light=doc.get("light", 100),
        null=doc.get("null", 200),
        seed=doc.get("seed", 0),
    )
    build_config = BuildConfig.from_dict(doc.get("build", {}))
    report, _ = standard_benchmark(
        ds,
        spec,
        build_config=build_config,
        rate=doc.get("sampleRate", 0.01),
        strata_attrs=doc.get("strataAttrs"),
    )
    click.echo(report_to_text(report))
    if json_out:
        dump_report(report, json_path=json_out)


@main.command()
@click.option("--data-dir", envvar="MAXENT_AQP_DATA", default=None,
              help=f"summary storage directory (env MAXENT_AQP_DATA)")
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(data_dir, host, port):
    """Start the HTTP service."""
    from .service import serve as run_service

    run_service(data_dir, host=host, port=port)


if __name__ == "__main__":
    main()
