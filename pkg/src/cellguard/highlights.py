"""Cell highlights: stale, fresh, refresher sets and their deltas.

Stale/fresh need one liveness pass per cell. Refresher cells admit two
computations: the quadratic definition-chasing one (concatenate every
non-stale cell in front of every stale cell and re-run liveness) and the
linear one that exploits the equality

    STALE(c_s) − STALE(c_r ⊕ c_s) = DEAD(c_r) ∩ STALE(c_s)

by building an inverted index from dead symbols to their cells. Both are
kept: the naive path doubles as the oracle for the fast path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .checker import (
    AnalysisCounters, liveness, resolve_live_symbols, static_cell_analysis,
)
from .lang import build_cfg, callee_chains
from .lang.names import QualifiedName
from .lang.parser import CellSyntaxError


@dataclass
class HighlightReport:
    counter: int
    stale: frozenset[str] = frozenset()
    fresh: frozenset[str] = frozenset()
    refresher: frozenset[str] = frozenset()
    new_fresh: frozenset[str] = frozenset()
    new_refresher: frozenset[str] = frozenset()
    analysis_counts: AnalysisCounters = field(default_factory=AnalysisCounters)
    stale_symbols: dict[str, frozenset[QualifiedName]] = field(default_factory=dict)

    def stale_symbol_names(self, cell_id: str) -> list[str]:
        return sorted(n.text for n in self.stale_symbols.get(cell_id, frozenset()))

    def to_payload(self, cell_order: list[str] | None = None) -> dict:
        def ordered(cells: frozenset[str]) -> list[str]:
            if cell_order is None:
                return sorted(cells)
            index = {cid: i for i, cid in enumerate(cell_order)}
            return sorted(cells, key=lambda c: index.get(c, len(index)))

        return {
            "counter": self.counter,
            "stale": ordered(self.stale),
            "fresh": ordered(self.fresh),
            "refresher": ordered(self.refresher),
            "new_fresh": ordered(self.new_fresh),
            "new_refresher": ordered(self.new_refresher),
        }


def empty_report(counter: int = 0) -> HighlightReport:
    return HighlightReport(counter=counter)


def _analyzable_cells(state) -> dict[str, object]:
    """Static analysis per cell; unparseable cells are excluded outright."""
    out: dict[str, object] = {}
    for cell_id, text in state.cells.items():
        try:
            out[cell_id] = static_cell_analysis(text)
        except CellSyntaxError:
            continue
    return out


def stale_set_of_stmts(stmts, state) -> frozenset[QualifiedName]:
    """STALE(·) of an ad-hoc statement list (used for cell concatenation)."""
    cfg = build_cfg(stmts)
    live = liveness(cfg).live_at_top
    resolved = resolve_live_symbols(live, state, callee_chains(stmts))
    return frozenset(s.name for s in resolved if s.stale)


def compute_stale_fresh(state, counters: AnalysisCounters | None = None):
    """(H_s, H_f, per-cell stale-symbol map): one liveness run per cell."""
    counters = counters if counters is not None else AnalysisCounters()
    stale_cells: set[str] = set()
    fresh_cells: set[str] = set()
    stale_map: dict[str, frozenset[QualifiedName]] = {}
    for cell_id, analysis in _analyzable_cells(state).items():
        counters.liveness_runs += 1
        resolved = resolve_live_symbols(analysis.live_raw, state, analysis.called)
        stale_syms = frozenset(s.name for s in resolved if s.stale)
        cell_ts = state.cell_ts(cell_id)
        fresh_syms = {s for s in resolved if not s.stale and s.timestamp > cell_ts}
        if stale_syms:
            stale_cells.add(cell_id)
            stale_map[cell_id] = stale_syms
        elif fresh_syms:
            fresh_cells.add(cell_id)
    return frozenset(stale_cells), frozenset(fresh_cells), stale_map


def compute_refresher_naive(state, stale_cells, stale_map, counters: AnalysisCounters | None = None) -> frozenset[str]:
    """Definition-chasing refresher computation: one liveness analysis per
    (non-stale, stale) cell pair."""
    counters = counters if counters is not None else AnalysisCounters()
    analyses = _analyzable_cells(state)
    refreshers: set[str] = set()
    for cr in analyses:
        if cr in stale_cells:
            continue
        for cs in stale_cells:
            if cs not in analyses:
                continue
            merged = analyses[cr].stmts + analyses[cs].stmts
            counters.liveness_runs += 1
            merged_stale = stale_set_of_stmts(merged, state)
            if stale_map[cs] - merged_stale:
                refreshers.add(cr)
    return frozenset(refreshers)


def compute_refresher_fast(state, stale_cells, stale_map, counters: AnalysisCounters | None = None) -> frozenset[str]:
    """Inverted-index refresher computation: at most one dead analysis per
    non-stale cell, no pairwise liveness."""
    counters = counters if counters is not None else AnalysisCounters()
    analyses = _analyzable_cells(state)
    dead_index: dict[QualifiedName, set[str]] = {}
    for cell_id, analysis in analyses.items():
        if cell_id in stale_cells:
            continue
        counters.dead_runs += 1
        for name in analysis.dead_set:
            dead_index.setdefault(name, set()).add(cell_id)
    refreshers: set[str] = set()
    for cs in stale_cells:
        for name in stale_map.get(cs, frozenset()):
            refreshers.update(dead_index.get(name, ()))
    return frozenset(refreshers) - stale_cells


def compute_deltas(previous: HighlightReport | None, fresh, refresher):
    """New fresh / new refresher cells relative to the preceding report."""
    if previous is None:
        return frozenset(fresh), frozenset(refresher)
    return frozenset(fresh) - previous.fresh, frozenset(refresher) - previous.refresher


def compute_report(state, previous: HighlightReport | None = None, refresher: str = "fast") -> HighlightReport:
    """Full highlight report for the state's current execution counter."""
    counters = AnalysisCounters()
    stale_cells, fresh_cells, stale_map = compute_stale_fresh(state, counters)
    if refresher == "fast":
        refresher_cells = compute_refresher_fast(state, stale_cells, stale_map, counters)
    elif refresher == "naive":
        refresher_cells = compute_refresher_naive(state, stale_cells, stale_map, counters)
    else:
        raise ValueError(f"unknown refresher algorithm {refresher!r}")
    new_fresh, new_refresher = compute_deltas(previous, fresh_cells, refresher_cells)
    return HighlightReport(
        counter=state.exec_counter,
        stale=stale_cells,
        fresh=fresh_cells,
        refresher=refresher_cells,
        new_fresh=new_fresh,
        new_refresher=new_refresher,
        analysis_counts=counters,
        stale_symbols=stale_map,
    )
