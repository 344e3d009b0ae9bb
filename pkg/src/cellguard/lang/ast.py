"""CellScript AST node definitions and the canonical pretty-printer.

Nodes compare structurally; source spans and statement ids are carried as
non-comparing fields so ``parse(pretty(ast)) == ast`` holds for any tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

AUG_OPS = ("+=", "-=", "*=", "/=")
BIN_OPS = ("+", "-", "*", "/", "//", "%", "and", "or")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
UNARY_OPS = ("-", "not")


@dataclass(frozen=True)
class Span:
    line: int
    col: int


# --- expressions ---


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Name(Expr):
    id: str


@dataclass(frozen=True)
class Num(Expr):
    value: float | int


@dataclass(frozen=True)
class Str(Expr):
    value: str


@dataclass(frozen=True)
class Bool(Expr):
    value: bool


@dataclass(frozen=True)
class NoneLit(Expr):
    pass


@dataclass(frozen=True)
class ListLit(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class DictLit(Expr):
    keys: tuple[str, ...]
    values: tuple[Expr, ...]


@dataclass(frozen=True)
class Attr(Expr):
    obj: Expr
    name: str


@dataclass(frozen=True)
class Sub(Expr):
    obj: Expr
    index: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Lambda(Expr):
    params: tuple[str, ...]
    body: Expr


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Compare(Expr):
    op: str
    left: Expr
    right: Expr


# --- statements ---


@dataclass
class Stmt:
    span: Span = field(default=Span(0, 0), compare=False, kw_only=True)
    sid: int = field(default=-1, compare=False, kw_only=True)


@dataclass
class Assign(Stmt):
    target: Expr  # Name | Attr | Sub
    value: Expr


@dataclass
class AugAssign(Stmt):
    target: Expr
    op: str  # one of AUG_OPS without '='
    value: Expr


@dataclass
class ExprStmt(Stmt):
    value: Expr


@dataclass
class If(Stmt):
    arms: tuple[tuple[Expr, tuple[Stmt, ...]], ...]  # (condition, body) per if/elif
    orelse: tuple[Stmt, ...]


@dataclass
class While(Stmt):
    cond: Expr
    body: tuple[Stmt, ...]


@dataclass
class For(Stmt):
    var: str
    iterable: Expr
    body: tuple[Stmt, ...]


@dataclass
class FuncDef(Stmt):
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]


@dataclass
class Return(Stmt):
    value: Expr | None


@dataclass
class Del(Stmt):
    target: Expr


@dataclass
class Pass(Stmt):
    pass


def number_statements(stmts: tuple[Stmt, ...] | list[Stmt]) -> int:
    """Assign preorder statement ids (including nested bodies); returns count."""
    counter = 0

    def walk(body) -> None:
        nonlocal counter
        for s in body:
            s.sid = counter
            counter += 1
            if isinstance(s, If):
                for _, arm in s.arms:
                    walk(arm)
                walk(s.orelse)
            elif isinstance(s, (While, For, FuncDef)):
                walk(s.body)

    walk(stmts)
    return counter


# --- pretty printer ---

_PRECEDENCE = {
    "or": 1,
    "and": 2,
    "not": 3,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "//": 6, "%": 6,
    "unary-": 7,
}


def render_str(value: str) -> str:
    """Double-quoted literal using only the escapes the lexer understands."""
    out = ['"']
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _expr_prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PRECEDENCE[e.op]
    if isinstance(e, Compare):
        return _PRECEDENCE[e.op]
    if isinstance(e, Unary):
        return _PRECEDENCE["not"] if e.op == "not" else _PRECEDENCE["unary-"]
    if isinstance(e, Lambda):
        return 0
    return 100


def render_expr(e: Expr) -> str:
    if isinstance(e, Name):
        return e.id
    if isinstance(e, Num):
        if isinstance(e.value, float) and e.value.is_integer():
            return f"{e.value:.1f}"
        return repr(e.value)
    if isinstance(e, Str):
        return render_str(e.value)
    if isinstance(e, Bool):
        return "True" if e.value else "False"
    if isinstance(e, NoneLit):
        return "None"
    if isinstance(e, ListLit):
        return "[" + ", ".join(render_expr(x) for x in e.items) + "]"
    if isinstance(e, DictLit):
        pairs = (f"{render_str(k)}: {render_expr(v)}" for k, v in zip(e.keys, e.values))
        return "{" + ", ".join(pairs) + "}"
    if isinstance(e, Attr):
        return f"{_postfix_operand(e.obj)}.{e.name}"
    if isinstance(e, Sub):
        return f"{_postfix_operand(e.obj)}[{render_expr(e.index)}]"
    if isinstance(e, Call):
        return f"{_postfix_operand(e.fn)}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, Lambda):
        return f"lambda {', '.join(e.params)}: {render_expr(e.body)}"
    if isinstance(e, Unary):
        inner = render_expr(e.operand)
        if _expr_prec(e.operand) < _expr_prec(e):
            inner = f"({inner})"
        return f"not {inner}" if e.op == "not" else f"-{inner}"
    if isinstance(e, (Binary, Compare)):
        lhs, rhs = render_expr(e.left), render_expr(e.right)
        prec = _expr_prec(e)
        if _expr_prec(e.left) < prec:
            lhs = f"({lhs})"
        # left-associative: parenthesise right operand at equal precedence
        if _expr_prec(e.right) <= prec:
            rhs = f"({rhs})"
        return f"{lhs} {e.op} {rhs}"
    raise TypeError(f"unknown expression node {e!r}")


def _postfix_operand(e: Expr) -> str:
    text = render_expr(e)
    if isinstance(e, (Binary, Compare, Unary, Lambda)) or text.startswith("-"):
        return f"({text})"
    return text


def render_stmts(stmts, indent: int = 0) -> str:
    pad = "    " * indent
    lines: list[str] = []
    for s in stmts:
        if isinstance(s, Assign):
            lines.append(f"{pad}{render_expr(s.target)} = {render_expr(s.value)}")
        elif isinstance(s, AugAssign):
            lines.append(f"{pad}{render_expr(s.target)} {s.op}= {render_expr(s.value)}")
        elif isinstance(s, ExprStmt):
            lines.append(f"{pad}{render_expr(s.value)}")
        elif isinstance(s, If):
            for i, (cond, body) in enumerate(s.arms):
                kw = "if" if i == 0 else "elif"
                lines.append(f"{pad}{kw} {render_expr(cond)}:")
                lines.append(render_stmts(body, indent + 1))
            if s.orelse:
                lines.append(f"{pad}else:")
                lines.append(render_stmts(s.orelse, indent + 1))
        elif isinstance(s, While):
            lines.append(f"{pad}while {render_expr(s.cond)}:")
            lines.append(render_stmts(s.body, indent + 1))
        elif isinstance(s, For):
            lines.append(f"{pad}for {s.var} in {render_expr(s.iterable)}:")
            lines.append(render_stmts(s.body, indent + 1))
        elif isinstance(s, FuncDef):
            lines.append(f"{pad}def {s.name}({', '.join(s.params)}):")
            lines.append(render_stmts(s.body, indent + 1))
        elif isinstance(s, Return):
            lines.append(f"{pad}return {render_expr(s.value)}" if s.value is not None else f"{pad}return")
        elif isinstance(s, Del):
            lines.append(f"{pad}del {render_expr(s.target)}")
        elif isinstance(s, Pass):
            lines.append(f"{pad}pass")
        else:
            raise TypeError(f"unknown statement node {s!r}")
    return "\n".join(lines)


def pretty_print(stmts) -> str:
    """Canonical source text for a statement list (4-space indentation)."""
    text = render_stmts(list(stmts))
    return text + "\n" if text else ""
