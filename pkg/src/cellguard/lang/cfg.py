"""Statement-granularity control-flow graphs for CellScript cells.

Compound statements are decomposed into condition/bind nodes; function
bodies are NOT inlined — each FuncDef keeps its own graph, built on
demand with :func:`function_cfg`. Loop headers gain a back edge plus a
zero-iteration bypass edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .analysis import expr_uses, use_def
from .ast import For, FuncDef, If, Return, Stmt, While
from .names import QualifiedName, qn


@dataclass
class CfgNode:
    id: int
    kind: str  # entry | exit | stmt | cond | bind
    use: frozenset[QualifiedName]
    defs: frozenset[QualifiedName]
    stmt: Stmt | None = None
    label: str = ""


@dataclass
class Cfg:
    nodes: dict[int, CfgNode] = field(default_factory=dict)
    succ: dict[int, list[int]] = field(default_factory=dict)
    pred: dict[int, list[int]] = field(default_factory=dict)
    entry: int = 0
    exit: int = 0
    stmts: tuple[Stmt, ...] = ()

    def branch_nodes(self) -> list[int]:
        return [n for n in self.nodes if len(self.succ[n]) > 1]

    def postorder(self) -> list[int]:
        order: list[int] = []
        seen: set[int] = set()
        stack: list[tuple[int, int]] = [(self.entry, 0)]
        seen.add(self.entry)
        while stack:
            node, i = stack.pop()
            succs = self.succ[node]
            if i < len(succs):
                stack.append((node, i + 1))
                child = succs[i]
                if child not in seen:
                    seen.add(child)
                    stack.append((child, 0))
            else:
                order.append(node)
        return order


class _Builder:
    def __init__(self) -> None:
        self.cfg = Cfg()
        self._next = 0

    def node(self, kind: str, use=frozenset(), defs=frozenset(), stmt=None, label="") -> int:
        nid = self._next
        self._next += 1
        self.cfg.nodes[nid] = CfgNode(nid, kind, frozenset(use), frozenset(defs), stmt, label)
        self.cfg.succ[nid] = []
        self.cfg.pred[nid] = []
        return nid

    def edge(self, src: int, dst: int) -> None:
        if dst not in self.cfg.succ[src]:
            self.cfg.succ[src].append(dst)
            self.cfg.pred[dst].append(src)

    def connect(self, frontier: list[int], target: int) -> None:
        for src in frontier:
            self.edge(src, target)

    def build_block(self, stmts, frontier: list[int], exit_id: int) -> list[int]:
        for stmt in stmts:
            if not frontier:
                break  # code after a return in this block is unreachable
            if isinstance(stmt, If):
                frontier = self._build_if(stmt, frontier, exit_id)
            elif isinstance(stmt, While):
                frontier = self._build_while(stmt, frontier, exit_id)
            elif isinstance(stmt, For):
                frontier = self._build_for(stmt, frontier, exit_id)
            elif isinstance(stmt, Return):
                use, defs = use_def(stmt)
                nid = self.node("stmt", use, defs, stmt, "return")
                self.connect(frontier, nid)
                self.edge(nid, exit_id)
                frontier = []
            else:
                use, defs = use_def(stmt)
                nid = self.node("stmt", use, defs, stmt, type(stmt).__name__.lower())
                self.connect(frontier, nid)
                frontier = [nid]
        return frontier

    def _build_if(self, stmt: If, frontier: list[int], exit_id: int) -> list[int]:
        out: list[int] = []
        incoming = frontier
        for cond, body in stmt.arms:
            cid = self.node("cond", expr_uses(cond), stmt=stmt, label="if")
            self.connect(incoming, cid)
            out.extend(self.build_block(body, [cid], exit_id))
            incoming = [cid]  # false edge falls through to the next arm
        if stmt.orelse:
            out.extend(self.build_block(stmt.orelse, incoming, exit_id))
        else:
            out.extend(incoming)
        return out

    def _build_while(self, stmt: While, frontier: list[int], exit_id: int) -> list[int]:
        cid = self.node("cond", expr_uses(stmt.cond), stmt=stmt, label="while")
        self.connect(frontier, cid)
        body_exits = self.build_block(stmt.body, [cid], exit_id)
        self.connect(body_exits, cid)  # back edge
        return [cid]  # bypass edge materialises when the successor attaches

    def _build_for(self, stmt: For, frontier: list[int], exit_id: int) -> list[int]:
        header = self.node("cond", expr_uses(stmt.iterable), stmt=stmt, label="for")
        self.connect(frontier, header)
        bind = self.node("bind", frozenset(), frozenset({qn(stmt.var)}), stmt, "for-bind")
        self.edge(header, bind)
        body_exits = self.build_block(stmt.body, [bind], exit_id)
        self.connect(body_exits, header)
        return [header]


def build_cfg(stmts) -> Cfg:
    builder = _Builder()
    cfg = builder.cfg
    cfg.stmts = tuple(stmts)
    cfg.entry = builder.node("entry")
    exit_id = builder.node("exit")
    frontier = builder.build_block(stmts, [cfg.entry], exit_id)
    builder.connect(frontier, exit_id)
    cfg.exit = exit_id
    _prune_unreachable(cfg)
    return cfg


def function_cfg(fd: FuncDef) -> Cfg:
    """CFG of a function body; cached on the node (ASTs are never mutated
    after parse, so the cache key is the node itself)."""
    cached = getattr(fd, "_body_cfg", None)
    if cached is None:
        cached = build_cfg(list(fd.body))
        object.__setattr__(fd, "_body_cfg", cached)
    return cached


def _prune_unreachable(cfg: Cfg) -> None:
    reachable: set[int] = set()
    stack = [cfg.entry]
    while stack:
        node = stack.pop()
        if node in reachable:
            continue
        reachable.add(node)
        stack.extend(cfg.succ[node])
    reachable.add(cfg.exit)  # keep exit even if every path loops forever
    dead = set(cfg.nodes) - reachable
    for nid in dead:
        del cfg.nodes[nid]
        del cfg.succ[nid]
        del cfg.pred[nid]
    for nid in cfg.nodes:
        cfg.succ[nid] = [s for s in cfg.succ[nid] if s in reachable]
        cfg.pred[nid] = [p for p in cfg.pred[nid] if p in reachable]
