"""Static USE/DEF extraction for CellScript statements.

USE sets contain free qualified names read by a statement (builtins and
lambda-bound names excluded). Reads through attribute/subscript chains
contribute the base name, every constant prefix, and the full qualified
name; a dynamic subscript degrades the chain to its longest constant
prefix. DEF sets contain the names (re)bound by the statement.
"""

from __future__ import annotations

from .ast import (
    Assign, Attr, AugAssign, Binary, Bool, Call, Compare, Del, DictLit,
    Expr, ExprStmt, For, FuncDef, If, Lambda, ListLit, Name, NoneLit, Num,
    Pass, Return, Stmt, Str, Sub, Unary, While,
)
from .names import QualifiedName, qn
from .parser import BUILTIN_NAMES

Bound = frozenset


def static_chain(expr: Expr, bound: Bound = frozenset()) -> QualifiedName | None:
    """Qualified name for a name-rooted chain of constant accessors, else None."""
    if isinstance(expr, Name):
        if expr.id in BUILTIN_NAMES or expr.id in bound:
            return None
        return qn(expr.id)
    if isinstance(expr, Attr):
        base = static_chain(expr.obj, bound)
        return base.child(expr.name) if base is not None else None
    if isinstance(expr, Sub):
        base = static_chain(expr.obj, bound)
        if base is None:
            return None
        if isinstance(expr.index, Num) and isinstance(expr.index.value, int):
            return base.child(expr.index.value)
        if isinstance(expr.index, Str):
            return base.child(expr.index.value)
        return None
    return None


def expr_uses(expr: Expr, bound: Bound = frozenset()) -> set[QualifiedName]:
    uses: set[QualifiedName] = set()
    _collect(expr, bound, uses)
    return uses


def _collect(expr: Expr, bound: Bound, out: set[QualifiedName]) -> None:
    if isinstance(expr, Name):
        if expr.id not in BUILTIN_NAMES and expr.id not in bound:
            out.add(qn(expr.id))
    elif isinstance(expr, (Num, Str, Bool, NoneLit)):
        pass
    elif isinstance(expr, ListLit):
        for item in expr.items:
            _collect(item, bound, out)
    elif isinstance(expr, DictLit):
        for value in expr.values:
            _collect(value, bound, out)
    elif isinstance(expr, (Attr, Sub)):
        chain = static_chain(expr, bound)
        if chain is not None:
            out.add(chain)
            out.update(chain.prefixes())
        else:
            _collect(expr.obj, bound, out)
        if isinstance(expr, Sub):
            _collect(expr.index, bound, out)
    elif isinstance(expr, Call):
        _collect(expr.fn, bound, out)
        for arg in expr.args:
            _collect(arg, bound, out)
    elif isinstance(expr, Lambda):
        _collect(expr.body, bound | frozenset(expr.params), out)
    elif isinstance(expr, Unary):
        _collect(expr.operand, bound, out)
    elif isinstance(expr, (Binary, Compare)):
        _collect(expr.left, bound, out)
        _collect(expr.right, bound, out)
    else:
        raise TypeError(f"unknown expression node {expr!r}")


def _target_sets(target: Expr) -> tuple[set[QualifiedName], set[QualifiedName]]:
    """(reads, defs) for an assignment target."""
    if isinstance(target, Name):
        return set(), {qn(target.id)}
    chain = static_chain(target)
    if chain is not None:
        # writing a.b.c traverses (reads) a and a.b
        return set(chain.prefixes()), {chain}
    # dynamic accessor: the concrete member is only known at runtime
    reads = expr_uses(target.obj)
    if isinstance(target, Sub):
        reads |= expr_uses(target.index)
    return reads, set()


def use_def(stmt: Stmt) -> tuple[set[QualifiedName], set[QualifiedName]]:
    """USE/DEF for a single non-compound statement."""
    if isinstance(stmt, Assign):
        reads, defs = _target_sets(stmt.target)
        return reads | expr_uses(stmt.value), defs
    if isinstance(stmt, AugAssign):
        reads, defs = _target_sets(stmt.target)
        # the target is read as well as written
        full = static_chain(stmt.target)
        if full is not None:
            reads.add(full)
        return reads | expr_uses(stmt.value), defs
    if isinstance(stmt, ExprStmt):
        return expr_uses(stmt.value), set()
    if isinstance(stmt, Return):
        return (expr_uses(stmt.value) if stmt.value is not None else set()), set()
    if isinstance(stmt, Del):
        reads, defs = _target_sets(stmt.target)
        return reads, defs
    if isinstance(stmt, FuncDef):
        # free names of the body surface at call sites, not at the def
        return set(), {qn(stmt.name)}
    if isinstance(stmt, Pass):
        return set(), set()
    if isinstance(stmt, (If, While, For)):
        raise ValueError("compound statements must be decomposed into CFG nodes first")
    raise TypeError(f"unknown statement node {stmt!r}")


def callee_chains(stmts) -> set[QualifiedName]:
    """Constant callee chains of calls at cell level (lambda/def bodies excluded)."""
    found: set[QualifiedName] = set()

    def walk_expr(expr: Expr) -> None:
        if isinstance(expr, Call):
            chain = static_chain(expr.fn)
            if chain is not None:
                found.add(chain)
            walk_expr(expr.fn)
            for arg in expr.args:
                walk_expr(arg)
        elif isinstance(expr, (Attr, Sub)):
            walk_expr(expr.obj)
            if isinstance(expr, Sub):
                walk_expr(expr.index)
        elif isinstance(expr, ListLit):
            for item in expr.items:
                walk_expr(item)
        elif isinstance(expr, DictLit):
            for value in expr.values:
                walk_expr(value)
        elif isinstance(expr, Unary):
            walk_expr(expr.operand)
        elif isinstance(expr, (Binary, Compare)):
            walk_expr(expr.left)
            walk_expr(expr.right)
        # lambdas are opaque here: their bodies only run if called elsewhere

    def walk_stmt(stmt: Stmt) -> None:
        if isinstance(stmt, Assign):
            walk_expr(stmt.target)
            walk_expr(stmt.value)
        elif isinstance(stmt, AugAssign):
            walk_expr(stmt.target)
            walk_expr(stmt.value)
        elif isinstance(stmt, ExprStmt):
            walk_expr(stmt.value)
        elif isinstance(stmt, Return):
            if stmt.value is not None:
                walk_expr(stmt.value)
        elif isinstance(stmt, If):
            for cond, body in stmt.arms:
                walk_expr(cond)
                for s in body:
                    walk_stmt(s)
            for s in stmt.orelse:
                walk_stmt(s)
        elif isinstance(stmt, While):
            walk_expr(stmt.cond)
            for s in stmt.body:
                walk_stmt(s)
        elif isinstance(stmt, For):
            walk_expr(stmt.iterable)
            for s in stmt.body:
                walk_stmt(s)
        elif isinstance(stmt, Del):
            walk_expr(stmt.target)
        # FuncDef bodies run only when called; Pass has nothing

    for s in stmts:
        walk_stmt(s)
    return found


def function_free_names(params: tuple[str, ...], body) -> set[QualifiedName]:
    """Free names a function body may read from notebook scope.

    Used to attribute liveness to call sites once the callee is known.
    Backed by liveness over the body CFG so names rebound before use do
    not count as free.
    """
    from .cfg import build_cfg  # local import: cfg depends on this module

    from_body = liveness_entry_names(build_cfg(list(body)))
    bound = frozenset(params)
    return {name for name in from_body if name.base not in bound}


def lambda_free_names(params: tuple[str, ...], body: Expr) -> set[QualifiedName]:
    return expr_uses(body, frozenset(params))


def liveness_entry_names(cfg) -> set[QualifiedName]:
    """Raw live-at-entry names of a CFG (no runtime resolution)."""
    from ..checker import liveness  # local import: checker builds on lang

    return set(liveness(cfg).live_at_top)
