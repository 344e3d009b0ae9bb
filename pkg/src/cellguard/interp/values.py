"""CellScript runtime values and library externals.

Numbers, strings, booleans, and None follow copy semantics; lists and
dicts are reference values (so aliasing is observable) and are wrapped in
weakref-able holder classes. Library externals ("builtins") never read
notebook state: they see only their arguments.
"""

from __future__ import annotations

import json

from ..lang.analysis import function_free_names, lambda_free_names
from ..lang.ast import pretty_print, render_expr


class CellError(Exception):
    """Runtime error inside a cell; aborts the remaining statements."""


class CellList:
    __slots__ = ("items", "__weakref__")

    def __init__(self, items=None):
        self.items: list = list(items) if items is not None else []


class CellDict:
    __slots__ = ("entries", "__weakref__")

    def __init__(self, entries=None):
        self.entries: dict = dict(entries) if entries is not None else {}


class CellFunction:
    """Notebook-defined function or lambda; closes over its defining env."""

    __slots__ = ("name", "params", "body_stmts", "body_expr", "env", "defining_cell", "cell_hash", "_free", "__weakref__")

    def __init__(self, name, params, body_stmts=None, body_expr=None, env=None, defining_cell=None, cell_hash=None):
        self.name = name
        self.params = tuple(params)
        self.body_stmts = body_stmts
        self.body_expr = body_expr
        self.env = env
        self.defining_cell = defining_cell
        self.cell_hash = cell_hash
        self._free = None

    def free_names(self):
        """Names the body may read from notebook scope (resolution step)."""
        if self._free is None:
            if self.body_expr is not None:
                self._free = frozenset(lambda_free_names(self.params, self.body_expr))
            else:
                self._free = frozenset(function_free_names(self.params, self.body_stmts))
        return self._free

    def source(self) -> str:
        if self.body_expr is not None:
            return f"lambda {', '.join(self.params)}: {render_expr(self.body_expr)}"
        return pretty_print(self.body_stmts)


class BoundMethod:
    __slots__ = ("receiver", "method")

    def __init__(self, receiver, method: str):
        self.receiver = receiver
        self.method = method


BUILTIN_FUNCTIONS = ("print", "len", "range", "map", "list", "min", "sample", "fail")
LIST_METHODS = ("append",)
DICT_METHODS = ("agg",)

_RANGE_CAP = 1_000_000


def cell_truth(value) -> bool:
    if value is None:
        return False
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return value != 0
    if isinstance(value, str):
        return bool(value)
    if isinstance(value, CellList):
        return bool(value.items)
    if isinstance(value, CellDict):
        return bool(value.entries)
    return True


def cell_equal(a, b) -> bool:
    if isinstance(a, CellList) and isinstance(b, CellList):
        return len(a.items) == len(b.items) and all(cell_equal(x, y) for x, y in zip(a.items, b.items))
    if isinstance(a, CellDict) and isinstance(b, CellDict):
        return list(a.entries) == list(b.entries) and all(
            cell_equal(a.entries[k], b.entries[k]) for k in a.entries
        )
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return a == b
    if type(a) is type(b):
        return a == b
    return a is b


def cell_repr(value) -> str:
    if value is None:
        return "None"
    if isinstance(value, bool):
        return "True" if value else "False"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, CellList):
        return "[" + ", ".join(cell_repr(v) for v in value.items) + "]"
    if isinstance(value, CellDict):
        return "{" + ", ".join(f"{json.dumps(k)}: {cell_repr(v)}" for k, v in value.entries.items()) + "}"
    if isinstance(value, CellFunction):
        return f"<function {value.name or '<lambda>'}>"
    if isinstance(value, BoundMethod):
        return f"<method {value.method}>"
    return repr(value)


def cell_str(value) -> str:
    return value if isinstance(value, str) else cell_repr(value)


def cell_dump(value):
    """Stable JSON-able projection used for globals-dump comparisons."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, CellList):
        return ["list", [cell_dump(v) for v in value.items]]
    if isinstance(value, CellDict):
        return ["dict", [[k, cell_dump(v)] for k, v in value.entries.items()]]
    if isinstance(value, CellFunction):
        return ["function", value.name or "<lambda>", list(value.params), value.source()]
    return ["opaque", repr(value)]


def deterministic_sample(items: list, k: int | None = None) -> list:
    """Pseudo-shuffle with a fixed seed: pure in the input list."""
    out = list(items)
    state = (0x9E3779B9 ^ (len(out) * 2654435761)) & 0xFFFFFFFF
    for i in range(len(out) - 1, 0, -1):
        state = (state * 1664525 + 1013904223) & 0xFFFFFFFF
        j = state % (i + 1)
        out[i], out[j] = out[j], out[i]
    if k is not None:
        if k < 0 or k > len(out):
            raise CellError(f"sample size {k} out of range")
        out = out[:k]
    return out


def builtin_range(args) -> CellList:
    if not 1 <= len(args) <= 2:
        raise CellError("range() takes 1 or 2 arguments")
    lo, hi = (0, args[0]) if len(args) == 1 else (args[0], args[1])
    if not isinstance(lo, int) or not isinstance(hi, int) or isinstance(lo, bool) or isinstance(hi, bool):
        raise CellError("range() arguments must be integers")
    if hi - lo > _RANGE_CAP:
        raise CellError(f"range() result larger than {_RANGE_CAP}")
    return CellList(range(lo, hi))


def builtin_len(args):
    if len(args) != 1:
        raise CellError("len() takes exactly 1 argument")
    v = args[0]
    if isinstance(v, str):
        return len(v)
    if isinstance(v, CellList):
        return len(v.items)
    if isinstance(v, CellDict):
        return len(v.entries)
    raise CellError(f"len() unsupported for {type_name(v)}")


def builtin_min(args):
    values = args
    if len(args) == 1 and isinstance(args[0], CellList):
        values = args[0].items
    if not values:
        raise CellError("min() of empty sequence")
    try:
        return min(values)
    except TypeError:
        raise CellError("min() arguments must be mutually comparable") from None


def builtin_list(args):
    if len(args) != 1:
        raise CellError("list() takes exactly 1 argument")
    v = args[0]
    if isinstance(v, CellList):
        return CellList(v.items)
    if isinstance(v, CellDict):
        return CellList(v.entries.keys())
    if isinstance(v, str):
        return CellList(v)
    raise CellError(f"list() unsupported for {type_name(v)}")


def type_name(value) -> str:
    if value is None:
        return "None"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, CellList):
        return "list"
    if isinstance(value, CellDict):
        return "dict"
    if isinstance(value, (CellFunction, BoundMethod)):
        return "function"
    return type(value).__name__
