"""Deterministic synthetic session corpus.

Stands in for scraped human logs: each session first runs every cell in
order, then interleaves edits, reruns, and new cells. The simulated user
follows the engine's own refresher suggestion with a configurable
probability after editing a dependency, and mostly avoids stale cells.
Same seed, same corpus, byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from ..highlights import compute_report, empty_report
from ..interp import NotebookState
from .session_log import LogEntry, SessionLog

_WORDS = (
    "alpha", "bravo", "carol", "delta", "echo", "fargo", "golf", "hotel",
    "india", "julia", "kilo", "lima", "mike", "nova", "oscar", "papa",
    "quest", "romeo", "sierra", "tango", "umber", "victor", "whisk",
    "xenon", "yonder", "zulu",
)


@dataclass(frozen=True)
class CorpusParams:
    cells: int = 10
    steps: int = 50
    edit_rate: float = 0.8  # probability a step revisits an existing cell at all
    edit_text_prob: float = 0.6  # probability a revisit edits the text first
    dependency_density: float = 0.5
    refresher_follow: float = 0.7
    stale_run_rate: float = 0.05
    loop_trip: int = 0  # >0 adds a loop of that many iterations per cell


def _var_name(index: int) -> str:
    word = _WORDS[index % len(_WORDS)]
    return word if index < len(_WORDS) else f"{word}_{index // len(_WORDS)}"


def _cell_source(name: str, deps: list[str], const: int, loop_trip: int) -> str:
    expr = " + ".join(deps + [str(const)])
    lines: list[str]
    if loop_trip > 0:
        lines = [
            f"{name} = 0",
            f"for k_{name} in range({loop_trip}):",
            f"    {name} = {name} + k_{name}",
            f"{name} = {name} + {expr}",
        ]
    else:
        lines = [f"{name} = {expr}"]
    lines.append(f'{name}_tag = "cell of {name}"')
    lines.append(f"print({name}_tag, {name})")
    return "\n".join(lines) + "\n"


class _SessionSim:
    def __init__(self, rng: random.Random, params: CorpusParams):
        self.rng = rng
        self.params = params
        self.state = NotebookState(trace=True)
        self.report = empty_report()
        self.entries: list[LogEntry] = []
        self.specs: dict[str, tuple[str, list[str], int]] = {}  # cell -> (var, deps, const)
        self.counter = 0

    def build(self) -> SessionLog:
        params = self.params
        for i in range(params.cells):
            self._create_cell(i)
        for _ in range(params.steps):
            self._step()
        return SessionLog(self.entries)

    def _create_cell(self, index: int) -> None:
        name = _var_name(index)
        pool = [self.specs[cid][0] for cid in self.specs]
        deps = [v for v in pool if self.rng.random() < self.params.dependency_density]
        self.rng.shuffle(deps)
        deps = deps[:3]
        const = self.rng.randrange(1, 50)
        source = _cell_source(name, deps, const, self.params.loop_trip)
        cell_id = self.state.upsert_cell(source)
        self.specs[cell_id] = (name, deps, const)
        self._run(cell_id)

    def _run(self, cell_id: str) -> None:
        self.counter += 1
        self.entries.append(LogEntry(self.counter, self.state.cells[cell_id]))
        self.state.execute_cell(cell_id)
        self.report = compute_report(self.state, previous=self.report, refresher="fast")

    def _step(self) -> None:
        rng = self.rng
        params = self.params
        cell_ids = self.state.cell_ids()
        if rng.random() >= params.edit_rate:
            # with edit_rate 0 a session only ever appends fresh cells,
            # so no re-executions (and no predictive-power samples) occur
            self._create_cell(len(self.specs))
            return
        if rng.random() < params.edit_text_prob:
            cell_id = rng.choice(cell_ids)
            name, deps, _ = self.specs[cell_id]
            const = rng.randrange(1, 50)
            self.specs[cell_id] = (name, deps, const)
            self.state.upsert_cell(_cell_source(name, deps, const, params.loop_trip), cell_id)
            self._run(cell_id)
            # after editing a dependency, the simulated user usually follows
            # the engine's refresher suggestion
            if self.report.refresher and rng.random() < params.refresher_follow:
                self._run(rng.choice(sorted(self.report.refresher)))
            return
        stale = sorted(self.report.stale)
        if stale and rng.random() < params.stale_run_rate:
            self._run(rng.choice(stale))
            return
        safe = [cid for cid in cell_ids if cid not in self.report.stale]
        self._run(rng.choice(safe or cell_ids))


def generate_session(seed: int, params: CorpusParams = CorpusParams()) -> SessionLog:
    return _SessionSim(random.Random(seed), params).build()


def generate_corpus(seed: int, n_sessions: int, params: CorpusParams = CorpusParams()) -> list[SessionLog]:
    return [generate_session(seed * 1_000_003 + i, params) for i in range(n_sessions)]


def corpus_params(**overrides) -> CorpusParams:
    return replace(CorpusParams(), **overrides)
