"""Tracing interpreter for CellScript notebooks.

Execution is statement-by-statement; after each statement the matching
lineage rule is applied with runtime-refined uses. Instrumentation is
bounded: each statement key ``(cell, statement, source-hash)`` emits
fine-grained events only the first time it ever executes. A statement
seen before in the *same* execution (a loop repeat) emits nothing at all;
one seen in a *previous* execution re-applies its lineage rule at base
granularity from the statement's static USE/DEF sets. Editing a cell
changes its hash and therefore re-instruments it.

Tracing is suspended inside library externals: no events are emitted
until control returns to notebook code, so a call's result depends only
on the call's argument uses.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache

from ..lang import parse_cell, qn
from ..lang.analysis import expr_uses, lambda_free_names, use_def
from ..lang.ast import (
    Assign, Attr, AugAssign, Binary, Bool, Call, Compare, Del, DictLit,
    Expr, ExprStmt, For, FuncDef, If, Lambda, ListLit, Name, NoneLit, Num,
    Pass, Return, Stmt, Str, Sub, Unary, While,
)
from ..lang.names import QualifiedName
from ..lang.parser import BUILTIN_NAMES, CellSyntaxError
from ..lineage import LineageGraph
from .values import (
    BoundMethod, CellDict, CellError, CellFunction, CellList, builtin_len,
    builtin_list, builtin_min, builtin_range, cell_dump, cell_equal,
    cell_str, cell_truth, deterministic_sample, type_name,
)

STEP_BUDGET = 2_000_000
CALL_DEPTH_LIMIT = 64

PLAIN, COARSE, FULL = 0, 1, 2


class BuiltinFunction:
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name


_BUILTIN_VALUES = {name: BuiltinFunction(name) for name in BUILTIN_NAMES}


@lru_cache(maxsize=4096)
def cached_parse(text: str) -> tuple:
    return tuple(parse_cell(text))


@lru_cache(maxsize=4096)
def cell_hash(text: str) -> str:
    return hashlib.sha1(text.encode("utf-8")).hexdigest()[:16]


def _static_uses(stmt: Stmt) -> frozenset[QualifiedName]:
    cached = getattr(stmt, "_use_cache", None)
    if cached is None:
        cached = frozenset(use_def(stmt)[0])
        stmt._use_cache = cached
    return cached


def _is_mutable(value) -> bool:
    return isinstance(value, (CellList, CellDict))


class _ReturnSignal(Exception):
    def __init__(self, value, uses):
        self.value = value
        self.uses = uses


@dataclass
class ExecResult:
    counter: int
    status: str  # "ok" | "error"
    error: str | None = None
    error_statement: int | None = None  # 1-based top-level index; 0 = parse error
    stdout: str = ""
    lineage_events: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_payload(self) -> dict:
        return {
            "counter": self.counter,
            "status": self.status,
            "error": self.error,
            "error_statement": self.error_statement,
            "stdout": self.stdout,
            "events": self.lineage_events,
        }


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, vars=None, parent=None):
        self.vars = vars if vars is not None else {}
        self.parent = parent


class _Ctx:
    """Per-execution bookkeeping (tracing, stdout, budgets)."""

    __slots__ = (
        "state", "counter", "stdout", "events", "steps", "depth",
        "suspend", "local_seen", "mode", "static_uses", "collect_return",
    )

    def __init__(self, state: "NotebookState", counter: int):
        self.state = state
        self.counter = counter
        self.stdout: list[str] = []
        self.events: list[dict] = []
        self.steps = 0
        self.depth = 0
        self.suspend = 0
        self.local_seen: set = set()
        self.mode = PLAIN
        self.static_uses: frozenset[QualifiedName] = frozenset()
        self.collect_return = [False]

    def tick(self) -> None:
        self.steps += 1
        if self.steps > STEP_BUDGET:
            raise CellError(f"statement budget exceeded ({STEP_BUDGET})")

    def emit(self, kind: str, target, uses=()) -> None:
        self.events.append(
            {
                "kind": kind,
                "target": target,
                "uses": sorted(u.text for u in uses),
                "counter": self.counter,
            }
        )


class NotebookState:
    """One notebook session: cells, execution counter, globals, lineage."""

    def __init__(self, trace: bool = True):
        self.trace = trace
        self.cells: dict[str, str] = {}
        self.exec_counter = 0
        self.globals: dict[str, object] = {}
        self.lineage = LineageGraph()
        self.cell_timestamps: dict[str, int] = {}
        self.statement_seen: set = set()
        self._next_cell_index = 0

    # --- notebook structure ---

    def upsert_cell(self, source: str, cell_id: str | None = None, position: int | None = None) -> str:
        if cell_id is None:
            self._next_cell_index += 1
            cell_id = f"c{self._next_cell_index}"
            while cell_id in self.cells:
                self._next_cell_index += 1
                cell_id = f"c{self._next_cell_index}"
        if cell_id in self.cells:
            self.cells[cell_id] = source
            return cell_id
        if position is None or position >= len(self.cells):
            self.cells[cell_id] = source
        else:
            ids = list(self.cells)
            ids.insert(max(position, 0), cell_id)
            old = dict(self.cells)
            old[cell_id] = source
            self.cells = {cid: old[cid] for cid in ids}
        return cell_id

    def remove_cell(self, cell_id: str) -> None:
        if cell_id not in self.cells:
            raise KeyError(cell_id)
        del self.cells[cell_id]
        self.cell_timestamps.pop(cell_id, None)

    def cell_ids(self) -> list[str]:
        return list(self.cells)

    def cell_ts(self, cell_id: str) -> int:
        return self.cell_timestamps.get(cell_id, 0)

    # --- runtime views used by the checker ---

    def chain_value(self, name: QualifiedName):
        """Current runtime value of a constant qualified chain, else None."""
        value = self.globals.get(name.base)
        if name.base not in self.globals:
            return None
        for acc in name.path:
            if isinstance(value, CellDict):
                key = acc.key
                if not isinstance(key, str) or key not in value.entries:
                    return None
                value = value.entries[key]
            elif isinstance(value, CellList) and isinstance(acc.key, int):
                if not -len(value.items) <= acc.key < len(value.items):
                    return None
                value = value.items[acc.key]
            else:
                return None
        return value

    def globals_dump(self) -> dict:
        return {name: cell_dump(value) for name, value in self.globals.items()}

    # --- execution ---

    def execute_cell(self, cell_id: str) -> ExecResult:
        if cell_id not in self.cells:
            raise KeyError(f"unknown cell {cell_id!r}")
        self.exec_counter += 1
        counter = self.exec_counter
        text = self.cells[cell_id]
        try:
            stmts = cached_parse(text)
        except CellSyntaxError as exc:
            return ExecResult(counter, "error", f"syntax error: {exc}", 0)
        self.cell_timestamps[cell_id] = counter
        ctx = _Ctx(self, counter)
        origin = (cell_id, cell_hash(text))
        env = Env(self.globals)
        status, error, error_at = "ok", None, None
        for index, stmt in enumerate(stmts, start=1):
            try:
                self._exec_stmt(stmt, env, ctx, origin)
            except CellError as exc:
                status, error, error_at = "error", str(exc), index
                break
        return ExecResult(counter, status, error, error_at, "".join(ctx.stdout), ctx.events)

    # --- statement dispatch ---

    def _stmt_mode(self, stmt: Stmt, ctx: _Ctx, origin) -> int:
        if not self.trace or ctx.suspend:
            return PLAIN
        key = (origin[0], stmt.sid, origin[1])
        if key in ctx.local_seen:
            return PLAIN
        ctx.local_seen.add(key)
        if key in self.statement_seen:
            return COARSE
        self.statement_seen.add(key)
        return FULL

    def _exec_stmt(self, stmt: Stmt, env: Env, ctx: _Ctx, origin) -> None:
        ctx.tick()
        mode = self._stmt_mode(stmt, ctx, origin)
        prev_mode, prev_static = ctx.mode, ctx.static_uses
        ctx.mode = mode
        if mode == COARSE and isinstance(stmt, (Assign, AugAssign, ExprStmt, Del, FuncDef)):
            ctx.static_uses = _static_uses(stmt)
        try:
            if isinstance(stmt, Assign):
                self._exec_assign(stmt, env, ctx, origin, augment=False)
            elif isinstance(stmt, AugAssign):
                self._exec_assign(stmt, env, ctx, origin, augment=True)
            elif isinstance(stmt, ExprStmt):
                acc = set() if mode == FULL else None
                self._eval(stmt.value, env, ctx, acc)
            elif isinstance(stmt, If):
                self._exec_if(stmt, env, ctx, origin)
            elif isinstance(stmt, While):
                self._exec_while(stmt, env, ctx, origin)
            elif isinstance(stmt, For):
                self._exec_for(stmt, env, ctx, origin, mode)
            elif isinstance(stmt, FuncDef):
                self._exec_funcdef(stmt, env, ctx, origin)
            elif isinstance(stmt, Return):
                self._exec_return(stmt, env, ctx)
            elif isinstance(stmt, Del):
                self._exec_del(stmt, env, ctx)
            elif isinstance(stmt, Pass):
                pass
            else:
                raise CellError(f"cannot execute {type(stmt).__name__}")
        finally:
            ctx.mode, ctx.static_uses = prev_mode, prev_static

    def _event_uses(self, ctx: _Ctx, acc) -> frozenset[QualifiedName]:
        if ctx.mode == FULL and acc is not None:
            return frozenset(acc)
        if ctx.mode == COARSE:
            return ctx.static_uses
        return frozenset()

    def _rhs_uses(self, ctx: _Ctx, stmt, acc) -> frozenset[QualifiedName]:
        """Dataflow into an assigned member: RHS reads only, never the
        container traversal."""
        if ctx.mode == FULL and acc is not None:
            return frozenset(acc)
        if ctx.mode == COARSE:
            cached = getattr(stmt, "_rhs_use_cache", None)
            if cached is None:
                cached = frozenset(expr_uses(stmt.value))
                stmt._rhs_use_cache = cached
            return cached
        return frozenset()

    def _exec_assign(self, stmt, env: Env, ctx: _Ctx, origin, augment: bool) -> None:
        collecting = ctx.mode == FULL
        acc: set | None = set() if collecting else None
        target = stmt.target

        if isinstance(target, Name):
            current = None
            if augment:
                current = self._lookup(target.id, env, ctx, acc)
            rhs = self._eval(stmt.value, env, ctx, acc)
            value = self._binop(stmt.op, current, rhs) if augment else rhs
            self._bind_name(target.id, value, env, ctx, acc, augment)
            return

        # attribute / subscript target: traversing the container chain is
        # not dataflow into the member, so it gets its own accumulator
        chain_acc: set | None = set() if collecting else None
        container, root, key = self._eval_target_chain(target, env, ctx, chain_acc)
        if augment:
            current = self._read_member(container, key, root, ctx, chain_acc)
            rhs = self._eval(stmt.value, env, ctx, acc)
            value = self._binop(stmt.op, current, rhs)
        else:
            rhs = self._eval(stmt.value, env, ctx, acc)
            value = rhs
        self._write_member(container, key, value)
        if not self.trace or ctx.suspend:
            return
        member_root = root if root is not None else self._canonical_name(container, ctx)
        member_q = member_root.child(key) if member_root is not None else None
        if ctx.mode == PLAIN:
            if member_q is not None:
                self.lineage.update_object(member_q, value, _is_mutable(value))
            return
        uses = self._rhs_uses(ctx, stmt, acc)
        if member_q is not None:
            self.lineage.apply_assignment(
                member_q, set(uses), ctx.counter, value=value,
                mutable=_is_mutable(value), augment=augment,
            )
            ctx.emit("assign", member_q.text, uses)
        self._mutate_object(container, uses, ctx)

    def _bind_name(self, name: str, value, env: Env, ctx: _Ctx, acc, augment: bool) -> None:
        scope = self._binding_scope(name, env)
        scope.vars[name] = value
        if scope.vars is not self.globals or not self.trace or ctx.suspend:
            return
        target_q = qn(name)
        if ctx.mode == PLAIN:
            self.lineage.update_object(target_q, value, _is_mutable(value))
            return
        uses = self._event_uses(ctx, acc)
        self.lineage.apply_assignment(
            target_q, set(uses), ctx.counter, value=value,
            mutable=_is_mutable(value), augment=augment,
        )
        ctx.emit("assign", target_q.text, uses)

    def _binding_scope(self, name: str, env: Env) -> Env:
        # assignment binds locally except at notebook level (no `global`)
        return env

    def _exec_if(self, stmt: If, env: Env, ctx: _Ctx, origin) -> None:
        for cond, body in stmt.arms:
            if cell_truth(self._eval(cond, env, ctx, None)):
                self._exec_block(body, env, ctx, origin)
                return
        if stmt.orelse:
            self._exec_block(stmt.orelse, env, ctx, origin)

    def _exec_while(self, stmt: While, env: Env, ctx: _Ctx, origin) -> None:
        while cell_truth(self._eval(stmt.cond, env, ctx, None)):
            ctx.tick()
            self._exec_block(stmt.body, env, ctx, origin)

    def _exec_for(self, stmt: For, env: Env, ctx: _Ctx, origin, mode: int) -> None:
        acc: set | None = set() if mode == FULL else None
        iterable = self._eval(stmt.iterable, env, ctx, acc)
        if isinstance(iterable, CellList):
            items = list(iterable.items)
        elif isinstance(iterable, str):
            items = list(iterable)
        else:
            raise CellError(f"cannot iterate over {type_name(iterable)}")
        if mode == COARSE:
            acc = set(expr_uses(stmt.iterable))
        is_global = env.vars is self.globals
        first = True
        for item in items:
            ctx.tick()
            env.vars[stmt.var] = item
            if is_global and self.trace and not ctx.suspend:
                if first and mode != PLAIN:
                    uses = frozenset(acc or ())
                    self.lineage.apply_assignment(
                        qn(stmt.var), set(uses), ctx.counter, value=item, mutable=_is_mutable(item)
                    )
                    ctx.emit("assign", stmt.var, uses)
                else:
                    self.lineage.update_object(qn(stmt.var), item, _is_mutable(item))
            first = False
            self._exec_block(stmt.body, env, ctx, origin)

    def _exec_funcdef(self, stmt: FuncDef, env: Env, ctx: _Ctx, origin) -> None:
        fn = CellFunction(
            stmt.name, stmt.params, body_stmts=stmt.body,
            env=None if env.vars is self.globals else env,
            defining_cell=origin[0], cell_hash=origin[1],
        )
        self._bind_name(stmt.name, fn, env, ctx, set(), augment=False)

    def _exec_return(self, stmt: Return, env: Env, ctx: _Ctx) -> None:
        if ctx.depth == 0:
            raise CellError("return outside function")
        uses: set | None = set() if ctx.collect_return[-1] else None
        value = self._eval(stmt.value, env, ctx, uses) if stmt.value is not None else None
        raise _ReturnSignal(value, frozenset(uses or ()))

    def _exec_del(self, stmt: Del, env: Env, ctx: _Ctx) -> None:
        target = stmt.target
        if isinstance(target, Name):
            scope = env
            if target.id not in scope.vars:
                raise CellError(f"cannot delete unbound name '{target.id}'")
            del scope.vars[target.id]
            if scope.vars is self.globals and self.trace and not ctx.suspend:
                if self.lineage.lookup(qn(target.id)) is not None:
                    self.lineage.delete_symbol(qn(target.id))
                if ctx.mode != PLAIN:
                    ctx.emit("delete", target.id)
            return
        acc: set | None = set() if ctx.mode == FULL else None
        container, root, key = self._eval_target_chain(target, env, ctx, acc)
        if not isinstance(container, CellDict):
            raise CellError("del on elements is only supported for dicts")
        if not isinstance(key, str) or key not in container.entries:
            raise CellError(f"cannot delete missing key {key!r}")
        del container.entries[key]
        if self.trace and not ctx.suspend:
            for alias in self.lineage.aliases_of(id(container)):
                member = alias.name.child(key)
                if self.lineage.lookup(member) is not None:
                    self.lineage.delete_symbol(member)
            if ctx.mode != PLAIN:
                self._mutate_object(container, self._event_uses(ctx, acc), ctx)
                ctx.emit("delete", (root.child(key).text if root else str(key)))

    def _exec_block(self, body, env: Env, ctx: _Ctx, origin) -> None:
        for stmt in body:
            self._exec_stmt(stmt, env, ctx, origin)

    # --- expression evaluation ---

    def _eval(self, expr: Expr, env: Env, ctx: _Ctx, acc):
        value, _ = self._eval_access(expr, env, ctx, acc)
        return value

    def _eval_access(self, expr: Expr, env: Env, ctx: _Ctx, acc):
        """Evaluate; track the qualified-name root of name-rooted chains so
        member reads refine to the concrete element symbol."""
        if isinstance(expr, Name):
            return self._lookup_with_root(expr.id, env, ctx, acc)
        if isinstance(expr, Num):
            return expr.value, None
        if isinstance(expr, Str):
            return expr.value, None
        if isinstance(expr, Bool):
            return expr.value, None
        if isinstance(expr, NoneLit):
            return None, None
        if isinstance(expr, ListLit):
            return CellList([self._eval(item, env, ctx, acc) for item in expr.items]), None
        if isinstance(expr, DictLit):
            return CellDict({k: self._eval(v, env, ctx, acc) for k, v in zip(expr.keys, expr.values)}), None
        if isinstance(expr, Lambda):
            if acc is not None and not ctx.suspend:
                acc.update(self._lambda_visible_frees(expr, env))
            fn = CellFunction(None, expr.params, body_expr=expr.body,
                              env=None if env.vars is self.globals else env)
            return fn, None
        if isinstance(expr, Attr):
            obj, root = self._eval_access(expr.obj, env, ctx, acc)
            return self._access_member(obj, expr.name, root, ctx, acc)
        if isinstance(expr, Sub):
            obj, root = self._eval_access(expr.obj, env, ctx, acc)
            index = self._eval(expr.index, env, ctx, acc)
            return self._access_member(obj, index, root, ctx, acc, subscript=True)
        if isinstance(expr, Call):
            value = self._eval_call(expr, env, ctx, acc)
            root = self._canonical_name(value, ctx) if _is_mutable(value) else None
            return value, root
        if isinstance(expr, Unary):
            operand = self._eval(expr.operand, env, ctx, acc)
            if expr.op == "not":
                return not cell_truth(operand), None
            if isinstance(operand, bool) or not isinstance(operand, (int, float)):
                raise CellError(f"bad operand for unary -: {type_name(operand)}")
            return -operand, None
        if isinstance(expr, Binary):
            if expr.op == "and":
                left = self._eval(expr.left, env, ctx, acc)
                return (self._eval(expr.right, env, ctx, acc) if cell_truth(left) else left), None
            if expr.op == "or":
                left = self._eval(expr.left, env, ctx, acc)
                return (left if cell_truth(left) else self._eval(expr.right, env, ctx, acc)), None
            left = self._eval(expr.left, env, ctx, acc)
            right = self._eval(expr.right, env, ctx, acc)
            return self._binop(expr.op, left, right), None
        if isinstance(expr, Compare):
            left = self._eval(expr.left, env, ctx, acc)
            right = self._eval(expr.right, env, ctx, acc)
            return self._compare(expr.op, left, right), None
        raise CellError(f"cannot evaluate {type(expr).__name__}")

    def _lambda_visible_frees(self, expr: Lambda, env: Env) -> set[QualifiedName]:
        # statically free names that would resolve to notebook globals here
        frees = set()
        for name in lambda_free_names(expr.params, expr.body):
            scope = env
            shadowed = False
            while scope.vars is not self.globals:
                if name.base in scope.vars:
                    shadowed = True
                    break
                scope = scope.parent
            if not shadowed and name.base in self.globals:
                frees.add(name)
        return frees

    def _lookup_with_root(self, name: str, env: Env, ctx: _Ctx, acc):
        scope = env
        while scope is not None:
            if name in scope.vars:
                value = scope.vars[name]
                if scope.vars is self.globals:
                    root = qn(name)
                    if acc is not None and not ctx.suspend:
                        acc.add(root)
                    return value, root
                return value, None
            scope = scope.parent if scope.vars is not self.globals else None
        if name in _BUILTIN_VALUES:
            return _BUILTIN_VALUES[name], None
        raise CellError(f"name '{name}' is not defined")

    def _lookup(self, name: str, env: Env, ctx: _Ctx, acc):
        return self._lookup_with_root(name, env, ctx, acc)[0]

    def _access_member(self, obj, key, root, ctx: _Ctx, acc, subscript: bool = False):
        if isinstance(obj, CellDict):
            if isinstance(key, str) and key in obj.entries:
                value = obj.entries[key]
                member = self._note_member_read(obj, root, key, value, ctx, acc)
                return value, member
            if isinstance(key, str) and not subscript and key == "agg":
                return BoundMethod(obj, "agg"), None
            if isinstance(key, str):
                raise CellError(f"dict has no entry {key!r}")
            raise CellError("dict keys are strings")
        if isinstance(obj, CellList):
            if subscript:
                if isinstance(key, bool) or not isinstance(key, int):
                    raise CellError("list indices must be integers")
                n = len(obj.items)
                if not -n <= key < n:
                    raise CellError(f"list index {key} out of range")
                idx = key % n if n else 0
                value = obj.items[idx]
                member = self._note_member_read(obj, root, idx, value, ctx, acc)
                return value, member
            if key == "append":
                return BoundMethod(obj, "append"), None
            raise CellError(f"list has no attribute {key!r}")
        if isinstance(obj, str) and subscript:
            if isinstance(key, bool) or not isinstance(key, int):
                raise CellError("string indices must be integers")
            if not -len(obj) <= key < len(obj):
                raise CellError(f"string index {key} out of range")
            return obj[key], None
        kind = "index" if subscript else "attribute"
        raise CellError(f"{type_name(obj)} has no {kind} access")

    def _note_member_read(self, container, root, key, value, ctx: _Ctx, acc) -> QualifiedName | None:
        if root is None:
            return None
        member = root.child(key)
        if acc is not None and not ctx.suspend:
            acc.add(member)
            container_sym = self.lineage.lookup(root)
            base_ts = container_sym.timestamp if container_sym is not None else 0
            self.lineage.touch_member(member, base_ts, value=value, mutable=_is_mutable(value))
        return member

    def _eval_target_chain(self, target, env: Env, ctx: _Ctx, acc):
        """Container value, its qualified root (if name-rooted), final key."""
        if isinstance(target, Attr):
            container, root = self._eval_access(target.obj, env, ctx, acc)
            if not isinstance(container, CellDict):
                raise CellError(f"cannot set attribute on {type_name(container)}")
            return container, root, target.name
        if isinstance(target, Sub):
            container, root = self._eval_access(target.obj, env, ctx, acc)
            index = self._eval(target.index, env, ctx, acc)
            if isinstance(container, CellDict):
                if not isinstance(index, str):
                    raise CellError("dict keys are strings")
                return container, root, index
            if isinstance(container, CellList):
                if isinstance(index, bool) or not isinstance(index, int):
                    raise CellError("list indices must be integers")
                n = len(container.items)
                if not -n <= index < n:
                    raise CellError(f"list index {index} out of range")
                return container, root, index % n if n else 0
            raise CellError(f"cannot assign into {type_name(container)}")
        raise CellError("invalid assignment target")

    def _read_member(self, container, key, root, ctx: _Ctx, acc):
        # chain/key already validated by _eval_target_chain
        if isinstance(container, CellDict):
            if key not in container.entries:
                raise CellError(f"dict has no entry {key!r}")
            value = container.entries[key]
        else:
            value = container.items[key]
        self._note_member_read(container, root, key, value, ctx, acc)
        return value

    def _write_member(self, container, key, value) -> None:
        if isinstance(container, CellDict):
            container.entries[key] = value
        else:
            container.items[key] = value

    def _canonical_name(self, value, ctx: _Ctx) -> QualifiedName | None:
        if not _is_mutable(value):
            return None
        aliases = self.lineage.aliases_of(id(value))
        if not aliases:
            return None
        best = max(aliases, key=lambda s: (s.timestamp, s.name.text))
        return best.name

    def _mutate_object(self, obj, uses, ctx: _Ctx) -> None:
        """Bump every alias of a mutated object; anonymous objects (no
        aliases) have nobody to notify."""
        if id(obj) not in self.lineage.registry:
            return
        bumped = self.lineage.record_mutation(id(obj), set(uses), ctx.counter)
        ctx.emit("mutate", sorted(s.name.text for s in bumped), uses)

    # --- calls ---

    def _eval_call(self, expr: Call, env: Env, ctx: _Ctx, acc):
        ctx.tick()
        fn, _ = self._eval_access(expr.fn, env, ctx, acc)
        arg_acc: set | None = set() if acc is not None else None
        args = [self._eval(a, env, ctx, arg_acc) for a in expr.args]
        if acc is not None:
            acc.update(arg_acc)
        return self.call_value(fn, args, ctx, acc, arg_acc)

    def call_value(self, fn, args, ctx: _Ctx, acc=None, arg_uses=None):
        if isinstance(fn, BuiltinFunction):
            return self._call_builtin(fn.name, args, ctx)
        if isinstance(fn, BoundMethod):
            return self._call_method(fn, args, ctx, acc, arg_uses)
        if isinstance(fn, CellFunction):
            return self._call_function(fn, args, ctx, acc)
        raise CellError(f"{type_name(fn)} is not callable")

    def _call_function(self, fn: CellFunction, args, ctx: _Ctx, acc):
        if len(args) != len(fn.params):
            raise CellError(
                f"{fn.name or '<lambda>'}() takes {len(fn.params)} arguments ({len(args)} given)"
            )
        if ctx.depth >= CALL_DEPTH_LIMIT:
            raise CellError("call depth limit exceeded")
        parent = fn.env if fn.env is not None else Env(self.globals)
        frame = Env(dict(zip(fn.params, args)), parent=parent)
        ctx.depth += 1
        collecting = acc is not None and not ctx.suspend
        if fn.body_expr is not None:
            try:
                return self._eval(fn.body_expr, frame, ctx, acc if collecting else None)
            finally:
                ctx.depth -= 1
        ctx.collect_return.append(collecting)
        try:
            origin = (fn.defining_cell, fn.cell_hash)
            self._exec_block(fn.body_stmts, frame, ctx, origin)
            return None
        except _ReturnSignal as ret:
            if collecting:
                acc.update(ret.uses)
            return ret.value
        finally:
            ctx.collect_return.pop()
            ctx.depth -= 1

    def _call_builtin(self, name: str, args, ctx: _Ctx):
        ctx.suspend += 1
        try:
            if name == "print":
                ctx.stdout.append(" ".join(cell_str(a) for a in args) + "\n")
                return None
            if name == "len":
                return builtin_len(args)
            if name == "range":
                return builtin_range(args)
            if name == "min":
                return builtin_min(args)
            if name == "list":
                return builtin_list(args)
            if name == "sample":
                if not args or not isinstance(args[0], CellList):
                    raise CellError("sample() takes a list")
                k = None
                if len(args) == 2:
                    if isinstance(args[1], bool) or not isinstance(args[1], int):
                        raise CellError("sample() size must be an integer")
                    k = args[1]
                elif len(args) > 2:
                    raise CellError("sample() takes 1 or 2 arguments")
                return CellList(deterministic_sample(args[0].items, k))
            if name == "map":
                if len(args) != 2 or not isinstance(args[1], CellList):
                    raise CellError("map() takes a function and a list")
                fn = args[0]
                return CellList([self.call_value(fn, [item], ctx) for item in args[1].items])
            if name == "fail":
                raise CellError("fail() aborted the cell")
        finally:
            ctx.suspend -= 1
        raise CellError(f"unknown builtin {name}")

    def _call_method(self, method: BoundMethod, args, ctx: _Ctx, acc, arg_uses):
        recv = method.receiver
        if method.method == "append":
            if len(args) != 1:
                raise CellError("append() takes exactly 1 argument")
            recv.items.append(args[0])
            if self.trace and not ctx.suspend and ctx.mode != PLAIN:
                uses = arg_uses if (ctx.mode == FULL and arg_uses is not None) else self._event_uses(ctx, None)
                self._mutate_object(recv, frozenset(uses), ctx)
            return None
        if method.method == "agg":
            ctx.suspend += 1
            try:
                if len(args) != 1 or not isinstance(args[0], CellDict):
                    raise CellError("agg() takes a dict of functions")
                result = CellDict()
                for col, column in recv.entries.items():
                    for fname, fn in args[0].entries.items():
                        result.entries[f"{col}_{fname}"] = self.call_value(fn, [column], ctx)
                return result
            finally:
                ctx.suspend -= 1
        raise CellError(f"unknown method {method.method}")

    # --- operators ---

    def _binop(self, op: str, left, right):
        num_l = isinstance(left, (int, float)) and not isinstance(left, bool)
        num_r = isinstance(right, (int, float)) and not isinstance(right, bool)
        if op == "+":
            if num_l and num_r:
                return left + right
            if isinstance(left, str) and isinstance(right, str):
                return left + right
            if isinstance(left, CellList) and isinstance(right, CellList):
                return CellList(left.items + right.items)
        elif op in ("-", "*", "/", "//", "%"):
            if num_l and num_r:
                if op in ("/", "//", "%") and right == 0:
                    raise CellError("division by zero")
                if op == "-":
                    return left - right
                if op == "*":
                    return left * right
                if op == "/":
                    return left / right
                if op == "//":
                    return left // right
                return left % right
        raise CellError(f"unsupported operands for {op}: {type_name(left)} and {type_name(right)}")

    def _compare(self, op: str, left, right) -> bool:
        if op == "==":
            return cell_equal(left, right)
        if op == "!=":
            return not cell_equal(left, right)
        num_l = isinstance(left, (int, float)) and not isinstance(left, bool)
        num_r = isinstance(right, (int, float)) and not isinstance(right, bool)
        comparable = (num_l and num_r) or (isinstance(left, str) and isinstance(right, str))
        if not comparable:
            raise CellError(f"cannot order {type_name(left)} and {type_name(right)}")
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right
