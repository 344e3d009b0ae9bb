"""Session replay harness: logs, identity inference, metrics, corpus, bench."""

from .bench import bench_csv, build_stale_notebook, default_sizes, run_bench
from .corpus import CorpusParams, corpus_params, generate_corpus, generate_session
from .harness import (
    FAMILIES, MetricsRecord, aggregate_metrics, infer_cell_identity,
    levenshtein, predictive_power, replay_session, similarity,
)
from .session_log import LogEntry, SessionLog

__all__ = [
    "CorpusParams",
    "FAMILIES",
    "LogEntry",
    "MetricsRecord",
    "SessionLog",
    "aggregate_metrics",
    "bench_csv",
    "build_stale_notebook",
    "corpus_params",
    "default_sizes",
    "generate_corpus",
    "generate_session",
    "infer_cell_identity",
    "levenshtein",
    "predictive_power",
    "replay_session",
    "run_bench",
    "similarity",
]
