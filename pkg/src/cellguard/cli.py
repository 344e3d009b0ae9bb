"""cellguard command line.

Batch harness commands (replay / gen-corpus / bench / check) run the
engine in-process; `serve` hosts the HTTP/WebSocket service and the
`session` group is a thin client for a running server.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .highlights import compute_report
from .interp import NotebookState
from .lang.notebook_io import load_notebook
from .replay import (
    SessionLog, aggregate_metrics, bench_csv, corpus_params, default_sizes,
    generate_corpus, replay_session, run_bench,
)


@click.group()
def main() -> None:
    """Notebook safety engine: lineage tracing, staleness detection, replay."""


@main.command()
@click.argument("logs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", "metrics_out", type=click.Path(dir_okay=False), help="write aggregate metrics JSON here")
@click.option("--refresher", type=click.Choice(["naive", "fast"]), default="fast", show_default=True)
@click.option("--no-trace", is_flag=True, help="disable lineage tracking (timing baseline; implies no metrics)")
@click.option("--seed", type=int, default=0, show_default=True, help="seed for the random-highlight baseline")
def replay(logs, metrics_out, refresher, no_trace, seed) -> None:
    """Replay execution logs and score highlight predictive power."""
    records = []
    want_metrics = not no_trace
    for i, path in enumerate(logs):
        log = SessionLog.load(path)
        record = replay_session(
            log, trace=not no_trace, metrics=want_metrics, refresher=refresher, seed=seed + i
        )
        records.append(record)
        click.echo(
            f"{path}: {record.executions} executions, "
            f"{record.error_executions} errors, "
            f"{record.safety_error_count} safety errors, "
            f"{record.wall_seconds:.3f}s"
        )
    summary = aggregate_metrics(records)
    if want_metrics:
        click.echo(json.dumps(summary["avg_predictive_power"], indent=2))
        click.echo(
            f"sessions with safety errors: {summary['sessions_with_safety_errors']}"
            f"/{summary['sessions_used']}"
        )
    else:
        click.echo(f"total wall time: {summary['total_wall_seconds']:.3f}s (tracing disabled)")
    if metrics_out:
        payload = dict(summary)
        payload["per_session"] = [r.to_payload() for r in records]
        Path(metrics_out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
        click.echo(f"metrics written to {metrics_out}")


@main.command("gen-corpus")
@click.option("--seed", type=int, required=True)
@click.option("--sessions", "n_sessions", type=int, default=10, show_default=True)
@click.option("--cells", type=int, default=10, show_default=True)
@click.option("--steps", type=int, default=50, show_default=True)
@click.option("--edit-rate", type=float, default=0.35, show_default=True)
@click.option("--refresher-follow", type=float, default=0.7, show_default=True)
@click.option("--loop-trip", type=int, default=0, show_default=True, help="add a loop of N iterations per cell")
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False), required=True)
def gen_corpus(seed, n_sessions, cells, steps, edit_rate, refresher_follow, loop_trip, out_dir) -> None:
    """Generate a deterministic synthetic session corpus (JSONL files)."""
    params = corpus_params(
        cells=cells, steps=steps, edit_rate=edit_rate,
        refresher_follow=refresher_follow, loop_trip=loop_trip,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, log in enumerate(generate_corpus(seed, n_sessions, params)):
        path = out / f"session_{i:04d}.jsonl"
        log.save(path)
    click.echo(f"wrote {n_sessions} sessions to {out}")


@main.command()
@click.option("--max-cells", type=int, default=200, show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True)
@click.option("-o", "--out", "out_path", type=click.Path(dir_okay=False), help="CSV output (default stdout)")
def bench(max_cells, repeats, out_path) -> None:
    """Measure analysis latency vs cell count for both refresher algorithms."""
    rows = run_bench(default_sizes(max_cells), repeats=repeats)
    text = bench_csv(rows)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("notebook", type=click.Path(exists=True, dir_okay=False))
@click.option("--refresher", type=click.Choice(["naive", "fast"]), default="fast", show_default=True)
def check(notebook, refresher) -> None:
    """Run a notebook file top-to-bottom and print the highlight report."""
    state = NotebookState(trace=True)
    for cell in load_notebook(notebook):
        state.upsert_cell(cell.text, cell.cell_id)
    for cell_id in state.cell_ids():
        result = state.execute_cell(cell_id)
        status = "ok" if result.ok else f"error: {result.error}"
        click.echo(f"[{result.counter}] {cell_id}: {status}")
        if result.stdout:
            click.echo(result.stdout, nl=False)
    report = compute_report(state, refresher=refresher)
    click.echo(json.dumps(report.to_payload(state.cell_ids()), indent=2))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
def serve(host, port) -> None:
    """Run the HTTP/WebSocket session service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="info")


@main.group()
@click.option("--server", default="http://127.0.0.1:8400", show_default=True)
@click.pass_context
def session(ctx, server) -> None:
    """Thin HTTP client for a running cellguard server."""
    ctx.obj = server.rstrip("/")


def _request(method: str, url: str, payload=None):
    import urllib.error
    import urllib.request

    data = json.dumps(payload).encode("utf-8") if payload is not None else None
    req = urllib.request.Request(url, data=data, method=method)
    req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        body = exc.read().decode("utf-8", "replace")
        click.echo(f"HTTP {exc.code}: {body}", err=True)
        sys.exit(1)


@session.command("create")
@click.pass_obj
def session_create(server) -> None:
    click.echo(json.dumps(_request("POST", f"{server}/sessions")))


@session.command("load")
@click.argument("session_id")
@click.argument("notebook", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def session_load(server, session_id, notebook) -> None:
    cells = [{"id": c.cell_id, "source": c.text} for c in load_notebook(notebook)]
    click.echo(json.dumps(_request("POST", f"{server}/sessions/{session_id}/notebook", {"cells": cells})))


@session.command("run")
@click.argument("session_id")
@click.argument("cell_id")
@click.option("--confirm", is_flag=True, help="execute even if the cell is stale")
@click.pass_obj
def session_run(server, session_id, cell_id, confirm) -> None:
    url = f"{server}/sessions/{session_id}/cells/{cell_id}/run?confirm={'true' if confirm else 'false'}"
    click.echo(json.dumps(_request("POST", url), indent=2))


@session.command("highlights")
@click.argument("session_id")
@click.pass_obj
def session_highlights(server, session_id) -> None:
    click.echo(json.dumps(_request("GET", f"{server}/sessions/{session_id}/highlights"), indent=2))


if __name__ == "__main__":
    main()
