"""CellScript: parser, AST, USE/DEF extraction, and CFG construction."""

from .analysis import callee_chains, expr_uses, static_chain, use_def
from .ast import pretty_print
from .cfg import Cfg, CfgNode, build_cfg, function_cfg
from .names import Accessor, QualifiedName, canonical_accessor, qn
from .notebook_io import CellSource, load_notebook, parse_notebook_json, parse_notebook_text
from .parser import BUILTIN_NAMES, CellSyntaxError, parse_cell

__all__ = [
    "Accessor",
    "BUILTIN_NAMES",
    "CellSource",
    "CellSyntaxError",
    "Cfg",
    "CfgNode",
    "QualifiedName",
    "build_cfg",
    "callee_chains",
    "canonical_accessor",
    "expr_uses",
    "function_cfg",
    "load_notebook",
    "parse_cell",
    "parse_notebook_json",
    "parse_notebook_text",
    "pretty_print",
    "qn",
    "static_chain",
    "use_def",
]
