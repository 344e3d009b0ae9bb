"""cellguard: any-order notebook safety engine.

Traces fine-grained symbol lineage while cells execute, statically
detects cells with live references to stale symbols, and computes which
cells resolve the staleness, plus a replay harness that scores highlight
sets against recorded user behavior.
"""

from .highlights import HighlightReport, compute_report, empty_report
from .interp import ExecResult, NotebookState
from .lang import CellSyntaxError, parse_cell, qn

__version__ = "0.1.0"

__all__ = [
    "CellSyntaxError",
    "ExecResult",
    "HighlightReport",
    "NotebookState",
    "compute_report",
    "empty_report",
    "parse_cell",
    "qn",
    "__version__",
]
