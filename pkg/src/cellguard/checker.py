"""Static checker: liveness and initialized-variable ("dead") analyses.

Liveness is the textbook backwards-may fixed point

    LIVE_in[s]  = USE[s] ∪ (LIVE_out[s] − DEF[s])
    LIVE_out[s] = ⋃ LIVE_in[successors]

and dead analysis is its forwards-must inversion

    DEAD_out[s] = (DEF[s] − USE[s]) ∪ DEAD_in[s]
    DEAD_in[s]  = ⋂ DEAD_out[predecessors]

initialized at the lattice maximum. The maximum (every symbol) is kept
symbolic as a complement-of-finite-set so the symbol universe is never
materialized.

The checker is pure over a state snapshot; runtime awareness enters only
through :func:`resolve_live_symbols`, which maps syntactic names onto
shadow symbols and attributes a called function's free variables to the
call site once the actual callee is known.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .lang import build_cfg, callee_chains, parse_cell, qn
from .lang.cfg import Cfg
from .lang.names import QualifiedName


@dataclass(frozen=True)
class DSet:
    """Finite or co-finite set of qualified names."""

    complement: bool
    items: frozenset[QualifiedName]

    @staticmethod
    def fin(items=frozenset()) -> "DSet":
        return DSet(False, frozenset(items))

    @staticmethod
    def top() -> "DSet":
        return DSet(True, frozenset())

    def union_finite(self, other: frozenset[QualifiedName]) -> "DSet":
        if self.complement:
            return DSet(True, self.items - other)
        return DSet(False, self.items | other)

    def intersect(self, other: "DSet") -> "DSet":
        if not self.complement and not other.complement:
            return DSet(False, self.items & other.items)
        if self.complement and other.complement:
            return DSet(True, self.items | other.items)
        if self.complement:
            return DSet(False, other.items - self.items)
        return DSet(False, self.items - other.items)

    def to_set(self) -> frozenset[QualifiedName]:
        if self.complement:
            raise ValueError("symbolic universal set was never grounded")
        return self.items

    def __contains__(self, name: QualifiedName) -> bool:
        return (name not in self.items) if self.complement else (name in self.items)


@dataclass
class AnalysisCounters:
    liveness_runs: int = 0
    dead_runs: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"liveness_runs": self.liveness_runs, "dead_runs": self.dead_runs}


@dataclass
class LivenessResult:
    live_at_top: frozenset[QualifiedName]
    live_in: dict[int, frozenset[QualifiedName]]
    live_out: dict[int, frozenset[QualifiedName]]
    iterations: int


@dataclass
class DeadResult:
    dead_at_bottom: frozenset[QualifiedName]
    dead_in: dict[int, DSet]
    dead_out: dict[int, DSet]
    iterations: int


def liveness(cfg: Cfg) -> LivenessResult:
    live_in: dict[int, frozenset[QualifiedName]] = {n: frozenset() for n in cfg.nodes}
    live_out: dict[int, frozenset[QualifiedName]] = {n: frozenset() for n in cfg.nodes}
    worklist = cfg.postorder()  # exit-first processing converges quickly
    pending = set(worklist)
    iterations = 0
    while worklist:
        nid = worklist.pop(0)
        pending.discard(nid)
        iterations += 1
        node = cfg.nodes[nid]
        out: frozenset[QualifiedName] = frozenset()
        for succ in cfg.succ[nid]:
            out |= live_in[succ]
        new_in = node.use | (out - node.defs)
        live_out[nid] = out
        if new_in != live_in[nid]:
            live_in[nid] = new_in
            for pred in cfg.pred[nid]:
                if pred not in pending:
                    pending.add(pred)
                    worklist.append(pred)
    return LivenessResult(live_in[cfg.entry], live_in, live_out, iterations)


def dead(cfg: Cfg) -> DeadResult:
    dead_in: dict[int, DSet] = {n: DSet.top() for n in cfg.nodes}
    dead_out: dict[int, DSet] = {n: DSet.top() for n in cfg.nodes}
    dead_in[cfg.entry] = DSet.fin()
    order = list(reversed(cfg.postorder()))  # reverse post-order
    worklist = list(order)
    pending = set(worklist)
    iterations = 0
    while worklist:
        nid = worklist.pop(0)
        pending.discard(nid)
        iterations += 1
        node = cfg.nodes[nid]
        if nid == cfg.entry:
            incoming = DSet.fin()
        else:
            incoming = DSet.top()
            for pred in cfg.pred[nid]:
                incoming = incoming.intersect(dead_out[pred])
        gen = node.defs - node.use
        new_out = incoming.union_finite(gen)
        dead_in[nid] = incoming
        if new_out != dead_out[nid]:
            dead_out[nid] = new_out
            for succ in cfg.succ[nid]:
                if succ not in pending:
                    pending.add(succ)
                    worklist.append(succ)
    return DeadResult(dead_out[cfg.exit].to_set(), dead_in, dead_out, iterations)


# --- runtime-aware resolution & cell classification ---


def resolve_live_symbols(raw_live, state, called=frozenset()):
    """Map raw live names to shadow symbols under the current runtime state.

    ``called`` holds the callee chains of the cell's call sites: when such
    a chain is itself live and currently resolves to a notebook-defined
    function, the function's free names become live too (one level deep).
    Unresolvable names are dropped.
    """
    resolved = {}
    for name in raw_live:
        sym = state.lineage.lookup(name)
        if sym is not None:
            resolved[name] = sym
    for chain in called:
        if chain not in raw_live:
            continue  # callee rebound within the cell before the call
        callee = state.chain_value(chain)
        if callee is None:
            continue
        free = getattr(callee, "free_names", None)
        if free is None:
            continue
        for name in free():
            sym = state.lineage.lookup(name)
            if sym is not None:
                resolved[name] = sym
    return set(resolved.values())


@dataclass
class CellClassification:
    stale_syms: set = field(default_factory=set)
    fresh_syms: set = field(default_factory=set)

    @property
    def is_stale(self) -> bool:
        return bool(self.stale_syms)

    @property
    def is_fresh(self) -> bool:
        return not self.stale_syms and bool(self.fresh_syms)


def classify_cell(stmts, state, cell_ts: int, counters: AnalysisCounters | None = None) -> CellClassification:
    """STALE/FRESH symbol sets for a cell (Defs. of stale/fresh cells)."""
    cfg = build_cfg(stmts)
    live = liveness(cfg)
    if counters is not None:
        counters.liveness_runs += 1
    resolved = resolve_live_symbols(live.live_at_top, state, callee_chains(stmts))
    stale_syms = {s for s in resolved if s.stale}
    fresh_syms = {s for s in resolved if not s.stale and s.timestamp > cell_ts}
    return CellClassification(stale_syms, fresh_syms)


def stale_names(classification: CellClassification) -> frozenset[QualifiedName]:
    return frozenset(s.name for s in classification.stale_syms)


# --- cached static per-cell analysis (keyed by source text) ---


@dataclass(frozen=True)
class StaticCellAnalysis:
    stmts: tuple
    live_raw: frozenset[QualifiedName]
    called: frozenset[QualifiedName]
    dead_set: frozenset[QualifiedName]


@lru_cache(maxsize=4096)
def static_cell_analysis(text: str) -> StaticCellAnalysis:
    stmts = tuple(parse_cell(text))
    cfg = build_cfg(stmts)
    return StaticCellAnalysis(
        stmts=stmts,
        live_raw=liveness(cfg).live_at_top,
        called=frozenset(callee_chains(stmts)),
        dead_set=dead(cfg).dead_at_bottom,
    )


__all__ = [
    "AnalysisCounters",
    "CellClassification",
    "DSet",
    "DeadResult",
    "LivenessResult",
    "classify_cell",
    "dead",
    "liveness",
    "qn",
    "resolve_live_symbols",
    "stale_names",
    "static_cell_analysis",
]
