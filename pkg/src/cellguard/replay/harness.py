"""Session replay: identity inference, predictive power, safety errors.

A log carries only source text per execution, so cell identity is
inferred: text at least 80% similar (normalized Levenshtein) to a known
cell is treated as an edit of that cell, anything else becomes a new cell
appended at the notebook end. Re-executions are the measurement points:
for every non-empty highlight family computed *before* the execution we
record how strongly it predicted the user's choice.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from ..highlights import HighlightReport, compute_report, empty_report
from ..interp import NotebookState, cached_parse
from ..lang.parser import CellSyntaxError
from .session_log import SessionLog

FAMILIES = ("H_s", "H_f", "dH_f", "H_r", "dH_r", "H_n", "H_rnd")

SIMILARITY_THRESHOLD = 0.8
ERROR_SESSION_CUTOFF = 0.5


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def infer_cell_identity(source: str, state: NotebookState) -> tuple[str, bool]:
    """(cell_id, is_new): best match at >= 80% similarity wins, ties broken
    by the most recently executed candidate."""
    best_id: str | None = None
    best_key: tuple[float, int, int] | None = None
    for position, (cell_id, text) in enumerate(state.cells.items()):
        sim = similarity(source, text)
        if sim < SIMILARITY_THRESHOLD:
            continue
        key = (sim, state.cell_ts(cell_id), position)
        if best_key is None or key > best_key:
            best_key = key
            best_id = cell_id
    if best_id is not None:
        return best_id, False
    return state.upsert_cell(source), True


def predictive_power(highlight: set[str], executed: str, notebook_size: int) -> float:
    """|N|/|H| when the executed cell is highlighted, else 0."""
    if not highlight:
        raise ValueError("predictive power of an empty highlight set is undefined")
    if notebook_size < 1:
        raise ValueError("notebook must contain at least one cell")
    return notebook_size / len(highlight) if executed in highlight else 0.0


@dataclass
class MetricsRecord:
    samples: dict[str, list[float]] = field(default_factory=lambda: {f: [] for f in FAMILIES})
    safety_error_count: int = 0
    executions: int = 0
    error_executions: int = 0
    cells_created: int = 0
    wall_seconds: float = 0.0

    def family_mean(self, family: str) -> float | None:
        values = self.samples[family]
        return sum(values) / len(values) if values else None

    def session_means(self) -> dict[str, float | None]:
        return {family: self.family_mean(family) for family in FAMILIES}

    @property
    def error_fraction(self) -> float:
        return self.error_executions / self.executions if self.executions else 0.0

    def to_payload(self) -> dict:
        return {
            "executions": self.executions,
            "error_executions": self.error_executions,
            "cells_created": self.cells_created,
            "safety_error_count": self.safety_error_count,
            "samples_per_family": {f: len(v) for f, v in self.samples.items()},
            "mean_predictive_power": self.session_means(),
            "wall_seconds": self.wall_seconds,
        }


def _parses(source: str) -> bool:
    try:
        cached_parse(source)
        return True
    except CellSyntaxError:
        return False


def replay_session(
    log: SessionLog,
    *,
    trace: bool = True,
    metrics: bool = True,
    refresher: str = "fast",
    seed: int = 0,
) -> MetricsRecord:
    """Replay one session through the engine, sampling predictive power at
    each re-execution from the pre-execution report."""
    state = NotebookState(trace=trace)
    record = MetricsRecord()
    rng = random.Random(seed ^ 0x5EED)
    report: HighlightReport = empty_report()
    prev_position: int | None = None
    started = time.perf_counter()

    for entry in log.entries:
        parse_ok = _parses(entry.source)
        cell_id, is_new = infer_cell_identity(entry.source, state)
        if is_new:
            record.cells_created += 1
        cell_ids = state.cell_ids()
        notebook_size = len(cell_ids)
        if metrics and not is_new and parse_ok:
            next_cell: set[str] = set()
            if prev_position is not None and prev_position + 1 < len(cell_ids):
                next_cell = {cell_ids[prev_position + 1]}
            random_cell = {rng.choice(cell_ids)}
            families = {
                "H_s": set(report.stale),
                "H_f": set(report.fresh),
                "dH_f": set(report.new_fresh),
                "H_r": set(report.refresher),
                "dH_r": set(report.new_refresher),
                "H_n": next_cell,
                "H_rnd": random_cell,
            }
            for family, highlight in families.items():
                if highlight:
                    record.samples[family].append(
                        predictive_power(highlight, cell_id, notebook_size)
                    )
            if cell_id in report.stale:
                record.safety_error_count += 1
        state.upsert_cell(entry.source, cell_id)
        result = state.execute_cell(cell_id)
        record.executions += 1
        if not result.ok:
            record.error_executions += 1
        if metrics:
            report = compute_report(state, previous=report, refresher=refresher)
        prev_position = state.cell_ids().index(cell_id)

    record.wall_seconds = time.perf_counter() - started
    return record


def aggregate_metrics(records: list[MetricsRecord]) -> dict:
    """Two-level mean: per-session averages, then the average of averages.
    Sessions with more than half of their executions erroring are dropped."""
    usable = [r for r in records if r.error_fraction <= ERROR_SESSION_CUTOFF]
    averages: dict[str, float | None] = {}
    sessions_with_samples: dict[str, int] = {}
    for family in FAMILIES:
        means = [m for r in usable if (m := r.family_mean(family)) is not None]
        averages[family] = sum(means) / len(means) if means else None
        sessions_with_samples[family] = len(means)
    return {
        "sessions_replayed": len(records),
        "sessions_used": len(usable),
        "sessions_excluded_error_heavy": len(records) - len(usable),
        "sessions_with_safety_errors": sum(1 for r in usable if r.safety_error_count > 0),
        "total_safety_errors": sum(r.safety_error_count for r in usable),
        "avg_predictive_power": averages,
        "sessions_with_samples": sessions_with_samples,
        "total_executions": sum(r.executions for r in records),
        "total_wall_seconds": sum(r.wall_seconds for r in records),
    }
