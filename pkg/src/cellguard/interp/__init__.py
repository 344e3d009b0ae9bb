"""Tracing interpreter: notebook state, cell execution, lineage events."""

from .interpreter import ExecResult, NotebookState, cached_parse, cell_hash
from .values import (
    BoundMethod, CellDict, CellError, CellFunction, CellList, cell_dump,
    cell_repr, cell_str, cell_truth,
)

__all__ = [
    "BoundMethod",
    "CellDict",
    "CellError",
    "CellFunction",
    "CellList",
    "ExecResult",
    "NotebookState",
    "cached_parse",
    "cell_dump",
    "cell_hash",
    "cell_repr",
    "cell_str",
    "cell_truth",
]
