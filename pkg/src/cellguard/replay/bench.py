"""Analysis-latency benchmark: fast vs naive refresher computation as the
notebook grows. Emits one CSV row per notebook size."""

from __future__ import annotations

import csv
import io
import time

from ..highlights import compute_report
from ..interp import NotebookState


def build_stale_notebook(n_cells: int, stale_fraction: float = 0.25) -> NotebookState:
    """Notebook with ``n_cells`` cells where at least ``stale_fraction`` of
    them are stale: writer cells feed reader cells, then some writers are
    edited and rerun so their readers go stale."""
    state = NotebookState(trace=True)
    n_writers = max(1, round(n_cells * stale_fraction))
    readers_per = max(1, (n_cells - n_writers) // n_writers)
    cell_of_writer: list[str] = []
    made = 0
    for w in range(n_writers):
        cid = state.upsert_cell(f"src_{w} = {w + 1}\n")
        cell_of_writer.append(cid)
        made += 1
    while made < n_cells:
        w = (made - n_writers) // readers_per % n_writers
        r = made - n_writers
        state.upsert_cell(f"out_{r} = src_{w} + {r}\nprint(out_{r})\n")
        made += 1
    for cid in state.cell_ids():
        state.execute_cell(cid)
    for w, cid in enumerate(cell_of_writer):
        state.upsert_cell(f"src_{w} = {w + 101}\n", cid)
        state.execute_cell(cid)
    return state


def _time_report(state: NotebookState, refresher: str, repeats: int) -> tuple[float, object]:
    best = float("inf")
    report = None
    for _ in range(repeats):
        start = time.perf_counter()
        report = compute_report(state, refresher=refresher)
        best = min(best, time.perf_counter() - start)
    return best, report


def run_bench(sizes, repeats: int = 3, stale_fraction: float = 0.25) -> list[dict]:
    rows = []
    for size in sizes:
        state = build_stale_notebook(size, stale_fraction)
        fast_s, fast_report = _time_report(state, "fast", repeats)
        naive_s, naive_report = _time_report(state, "naive", repeats)
        assert fast_report.refresher == naive_report.refresher
        rows.append(
            {
                "cells": size,
                "stale_cells": len(fast_report.stale),
                "fast_ms": round(fast_s * 1000, 3),
                "naive_ms": round(naive_s * 1000, 3),
                "fast_liveness_runs": fast_report.analysis_counts.liveness_runs,
                "fast_dead_runs": fast_report.analysis_counts.dead_runs,
                "naive_liveness_runs": naive_report.analysis_counts.liveness_runs,
                "naive_pair_analyses": naive_report.analysis_counts.liveness_runs - size,
            }
        )
    return rows


def bench_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def default_sizes(max_cells: int = 200) -> list[int]:
    sizes = [10, 20, 50, 100, 150, 200]
    return [s for s in sizes if s <= max_cells] or [max_cells]
