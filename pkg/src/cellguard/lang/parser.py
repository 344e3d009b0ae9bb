"""Lexer and recursive-descent parser for CellScript.

Block structure is indentation-based with a fixed 4-space unit; tab
characters anywhere in leading whitespace are rejected. All errors carry
1-based line/column positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import ast
from .ast import (
    Assign, Attr, AugAssign, Binary, Bool, Call, Compare, Del, DictLit,
    Expr, ExprStmt, For, FuncDef, If, Lambda, ListLit, Name, NoneLit, Num,
    Pass, Return, Span, Stmt, Str, Sub, Unary, While,
)

KEYWORDS = {
    "if", "elif", "else", "while", "for", "in", "def", "return", "del",
    "pass", "lambda", "and", "or", "not", "True", "False", "None",
}

# Names callable/readable as library externals. They are not notebook
# symbols and may not be rebound.
BUILTIN_NAMES = frozenset(
    {"print", "len", "range", "map", "list", "min", "sample", "fail"}
)


class CellSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NAME KEYWORD NUMBER STRING OP NEWLINE INDENT DEDENT EOF
    text: str
    line: int
    col: int


_TWO_CHAR_OPS = {"==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "//"}
_ONE_CHAR_OPS = set("+-*/%=<>:,()[]{}.")


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    indent_stack = [0]
    lines = source.split("\n")

    for lineno, raw in enumerate(lines, start=1):
        code = raw
        # leading whitespace / blank & comment-only lines produce no tokens
        stripped = code.lstrip(" ")
        if "\t" in code[: len(code) - len(stripped)]:
            raise CellSyntaxError("tab characters are not allowed in indentation", lineno, 1)
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(code) - len(stripped)
        if indent % 4 != 0:
            raise CellSyntaxError("indentation must be a multiple of 4 spaces", lineno, indent + 1)
        level = indent // 4
        if level > indent_stack[-1]:
            if level != indent_stack[-1] + 1:
                raise CellSyntaxError("unexpected indent", lineno, indent + 1)
            indent_stack.append(level)
            tokens.append(Token("INDENT", "", lineno, 1))
        while level < indent_stack[-1]:
            indent_stack.pop()
            tokens.append(Token("DEDENT", "", lineno, 1))
        if level != indent_stack[-1]:
            raise CellSyntaxError("unindent does not match any outer block", lineno, indent + 1)

        _lex_line(code, lineno, indent, tokens)
        tokens.append(Token("NEWLINE", "", lineno, len(code) + 1))

    while indent_stack[-1] > 0:
        indent_stack.pop()
        tokens.append(Token("DEDENT", "", len(lines) + 1, 1))
    tokens.append(Token("EOF", "", len(lines) + 1, 1))
    return tokens


def _lex_line(code: str, lineno: int, start: int, out: list[Token]) -> None:
    i = start
    n = len(code)
    while i < n:
        ch = code[i]
        col = i + 1
        if ch == " ":
            i += 1
            continue
        if ch == "\t":
            raise CellSyntaxError("tab characters are not allowed", lineno, col)
        if ch == "#":
            return
        if ch.isdigit() or (ch == "." and i + 1 < n and code[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (code[j].isdigit() or (code[j] == "." and not seen_dot)):
                if code[j] == ".":
                    # a '.' not followed by a digit is attribute access
                    if j + 1 < n and not code[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            # optional exponent: 1e6, 2.5e-3
            if j < n and code[j] in "eE":
                k = j + 1
                if k < n and code[k] in "+-":
                    k += 1
                if k < n and code[k].isdigit():
                    while k < n and code[k].isdigit():
                        k += 1
                    j = k
                    seen_dot = True
            out.append(Token("NUMBER", code[i:j], lineno, col))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (code[j].isalnum() or code[j] == "_"):
                j += 1
            word = code[i:j]
            out.append(Token("KEYWORD" if word in KEYWORDS else "NAME", word, lineno, col))
            i = j
            continue
        if ch in ("'", '"'):
            j = i + 1
            buf = []
            while j < n:
                c = code[j]
                if c == "\\":
                    if j + 1 >= n:
                        raise CellSyntaxError("unterminated escape", lineno, j + 1)
                    esc = code[j + 1]
                    mapped = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", '"': '"'}.get(esc)
                    if mapped is None:
                        raise CellSyntaxError(f"unknown escape \\{esc}", lineno, j + 1)
                    buf.append(mapped)
                    j += 2
                    continue
                if c == ch:
                    break
                buf.append(c)
                j += 1
            else:
                raise CellSyntaxError("unterminated string literal", lineno, col)
            out.append(Token("STRING", "".join(buf), lineno, col))
            i = j + 1
            continue
        two = code[i : i + 2]
        if two in _TWO_CHAR_OPS and not (two == "//" and code[i : i + 3] == "//="):
            out.append(Token("OP", two, lineno, col))
            i += 2
            continue
        if ch in _ONE_CHAR_OPS:
            out.append(Token("OP", ch, lineno, col))
            i += 1
            continue
        raise CellSyntaxError(f"unexpected character {ch!r}", lineno, col)


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.func_depth = 0

    # token plumbing

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind.lower()
            raise CellSyntaxError(f"expected {want}, found {tok.text or tok.kind!r}", tok.line, tok.col)
        return self.advance()

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    # statements

    def parse_program(self) -> list[Stmt]:
        stmts: list[Stmt] = []
        while not self.at("EOF"):
            stmts.append(self.parse_statement())
        return stmts

    def parse_block(self) -> tuple[Stmt, ...]:
        self.expect("OP", ":")
        self.expect("NEWLINE")
        self.expect("INDENT")
        body: list[Stmt] = []
        while not self.at("DEDENT") and not self.at("EOF"):
            body.append(self.parse_statement())
        self.expect("DEDENT")
        if not body:
            tok = self.peek()
            raise CellSyntaxError("empty block", tok.line, tok.col)
        return tuple(body)

    def parse_statement(self) -> Stmt:
        tok = self.peek()
        span = Span(tok.line, tok.col)
        if tok.kind == "KEYWORD":
            if tok.text == "if":
                return self._parse_if(span)
            if tok.text == "while":
                self.advance()
                cond = self.parse_expr()
                body = self.parse_block()
                return While(cond, body, span=span)
            if tok.text == "for":
                return self._parse_for(span)
            if tok.text == "def":
                return self._parse_def(span)
            if tok.text == "return":
                if self.func_depth == 0:
                    raise CellSyntaxError("return outside function", tok.line, tok.col)
                self.advance()
                value = None if self.at("NEWLINE") else self.parse_expr()
                self.expect("NEWLINE")
                return Return(value, span=span)
            if tok.text == "del":
                self.advance()
                target = self.parse_postfix()
                self._check_target(target, tok)
                self.expect("NEWLINE")
                return Del(target, span=span)
            if tok.text == "pass":
                self.advance()
                self.expect("NEWLINE")
                return Pass(span=span)
        return self._parse_simple(span)

    def _parse_if(self, span: Span) -> If:
        arms: list[tuple[Expr, tuple[Stmt, ...]]] = []
        self.expect("KEYWORD", "if")
        arms.append((self.parse_expr(), self.parse_block()))
        orelse: tuple[Stmt, ...] = ()
        while self.at("KEYWORD", "elif"):
            self.advance()
            arms.append((self.parse_expr(), self.parse_block()))
        if self.at("KEYWORD", "else"):
            self.advance()
            orelse = self.parse_block()
        return If(tuple(arms), orelse, span=span)

    def _parse_for(self, span: Span) -> For:
        self.expect("KEYWORD", "for")
        var = self._binding_name()
        self.expect("KEYWORD", "in")
        iterable = self.parse_expr()
        body = self.parse_block()
        return For(var, iterable, body, span=span)

    def _parse_def(self, span: Span) -> FuncDef:
        self.expect("KEYWORD", "def")
        name = self._binding_name()
        self.expect("OP", "(")
        params = self._param_list()
        self.expect("OP", ")")
        self.func_depth += 1
        try:
            body = self.parse_block()
        finally:
            self.func_depth -= 1
        return FuncDef(name, params, body, span=span)

    def _param_list(self) -> tuple[str, ...]:
        params: list[str] = []
        while self.at("NAME"):
            tok = self.peek()
            name = self._binding_name()
            if name in params:
                raise CellSyntaxError(f"duplicate parameter {name}", tok.line, tok.col)
            params.append(name)
            if self.at("OP", ","):
                self.advance()
            else:
                break
        return tuple(params)

    def _binding_name(self) -> str:
        tok = self.expect("NAME")
        if tok.text in BUILTIN_NAMES:
            raise CellSyntaxError(f"cannot bind builtin name {tok.text!r}", tok.line, tok.col)
        return tok.text

    def _check_target(self, target: Expr, tok: Token) -> None:
        base = target
        while isinstance(base, (Attr, Sub)):
            base = base.obj
        if not isinstance(base, Name):
            raise CellSyntaxError("invalid assignment target", tok.line, tok.col)
        if base.id in BUILTIN_NAMES:
            raise CellSyntaxError(f"cannot bind builtin name {base.id!r}", tok.line, tok.col)

    def _parse_simple(self, span: Span) -> Stmt:
        start_tok = self.peek()
        expr = self.parse_expr()
        if self.at("OP", "="):
            self.advance()
            self._check_target(expr, start_tok)
            if not isinstance(expr, (Name, Attr, Sub)):
                raise CellSyntaxError("invalid assignment target", start_tok.line, start_tok.col)
            value = self.parse_expr()
            self.expect("NEWLINE")
            return Assign(expr, value, span=span)
        for op in ("+=", "-=", "*=", "/="):
            if self.at("OP", op):
                self.advance()
                self._check_target(expr, start_tok)
                if not isinstance(expr, (Name, Attr, Sub)):
                    raise CellSyntaxError("invalid assignment target", start_tok.line, start_tok.col)
                value = self.parse_expr()
                self.expect("NEWLINE")
                return AugAssign(expr, op[0], value, span=span)
        self.expect("NEWLINE")
        return ExprStmt(expr, span=span)

    # expressions (precedence climbing)

    def parse_expr(self) -> Expr:
        if self.at("KEYWORD", "lambda"):
            self.advance()
            params = self._param_list()
            self.expect("OP", ":")
            body = self.parse_expr()
            return Lambda(params, body)
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at("KEYWORD", "or"):
            self.advance()
            left = Binary("or", left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while self.at("KEYWORD", "and"):
            self.advance()
            left = Binary("and", left, self.parse_not())
        return left

    def parse_not(self) -> Expr:
        if self.at("KEYWORD", "not"):
            self.advance()
            return Unary("not", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        left = self.parse_arith()
        for op in ("==", "!=", "<=", ">=", "<", ">"):
            if self.at("OP", op):
                self.advance()
                return Compare(op, left, self.parse_arith())
        return left

    def parse_arith(self) -> Expr:
        left = self.parse_term()
        while self.at("OP", "+") or self.at("OP", "-"):
            op = self.advance().text
            left = Binary(op, left, self.parse_term())
        return left

    def parse_term(self) -> Expr:
        left = self.parse_factor()
        while any(self.at("OP", op) for op in ("*", "/", "//", "%")):
            op = self.advance().text
            left = Binary(op, left, self.parse_factor())
        return left

    def parse_factor(self) -> Expr:
        if self.at("OP", "-"):
            self.advance()
            operand = self.parse_factor()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Unary("-", operand)
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        expr = self.parse_atom()
        while True:
            if self.at("OP", "."):
                self.advance()
                name_tok = self.peek()
                if name_tok.kind not in ("NAME", "KEYWORD"):
                    raise CellSyntaxError("expected attribute name", name_tok.line, name_tok.col)
                self.advance()
                expr = Attr(expr, name_tok.text)
            elif self.at("OP", "["):
                self.advance()
                index = self.parse_expr()
                self.expect("OP", "]")
                expr = Sub(expr, index)
            elif self.at("OP", "("):
                self.advance()
                args: list[Expr] = []
                while not self.at("OP", ")"):
                    args.append(self.parse_expr())
                    if self.at("OP", ","):
                        self.advance()
                    else:
                        break
                self.expect("OP", ")")
                expr = Call(expr, tuple(args))
            else:
                return expr

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NAME":
            self.advance()
            return Name(tok.text)
        if tok.kind == "NUMBER":
            self.advance()
            if "." in tok.text or "e" in tok.text or "E" in tok.text:
                return Num(float(tok.text))
            return Num(int(tok.text))
        if tok.kind == "STRING":
            self.advance()
            return Str(tok.text)
        if tok.kind == "KEYWORD":
            if tok.text == "True":
                self.advance()
                return Bool(True)
            if tok.text == "False":
                self.advance()
                return Bool(False)
            if tok.text == "None":
                self.advance()
                return NoneLit()
            if tok.text == "lambda":
                return self.parse_expr()
        if tok.kind == "OP":
            if tok.text == "(":
                self.advance()
                inner = self.parse_expr()
                self.expect("OP", ")")
                return inner
            if tok.text == "[":
                self.advance()
                items: list[Expr] = []
                while not self.at("OP", "]"):
                    items.append(self.parse_expr())
                    if self.at("OP", ","):
                        self.advance()
                    else:
                        break
                self.expect("OP", "]")
                return ListLit(tuple(items))
            if tok.text == "{":
                self.advance()
                keys: list[str] = []
                values: list[Expr] = []
                while not self.at("OP", "}"):
                    key_tok = self.expect("STRING")
                    self.expect("OP", ":")
                    keys.append(key_tok.text)
                    values.append(self.parse_expr())
                    if self.at("OP", ","):
                        self.advance()
                    else:
                        break
                self.expect("OP", "}")
                return DictLit(tuple(keys), tuple(values))
        raise CellSyntaxError(
            f"unexpected {tok.text!r}" if tok.text else f"unexpected {tok.kind.lower()}",
            tok.line,
            tok.col,
        )


def parse_cell(text: str) -> list[Stmt]:
    """Parse a cell into statements; raises CellSyntaxError with position."""
    stmts = Parser(tokenize(text)).parse_program()
    ast.number_statements(stmts)
    return stmts
