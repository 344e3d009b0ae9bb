"""Independent brute-force oracles and random input generators.

Everything here recomputes results from first principles (path
enumeration, fixed-point iteration over an adjacency snapshot) and never
calls the incremental code paths it is used to check.
"""

from __future__ import annotations

import random

from cellguard.lang.cfg import Cfg

# --- staleness oracle: least fixed point of the recursive predicate ---


def snapshot_lineage(graph) -> dict[str, tuple[int, frozenset[str]]]:
    """(timestamp, parent names) per symbol, decoupled from the live graph."""
    return {
        name.text: (sym.timestamp, frozenset(p.name.text for p in sym.parents))
        for name, sym in graph.symbols.items()
    }


def staleness_fixed_point(snapshot: dict[str, tuple[int, frozenset[str]]]) -> set[str]:
    """A symbol is stale iff some parent is newer than it or itself stale."""
    stale: set[str] = set()
    changed = True
    while changed:
        changed = False
        for name, (ts, parents) in snapshot.items():
            if name in stale:
                continue
            for parent in parents:
                if parent not in snapshot:
                    continue
                parent_ts = snapshot[parent][0]
                if parent_ts > ts or parent in stale:
                    stale.add(name)
                    changed = True
                    break
    return stale


def assert_graph_matches_oracle(graph) -> None:
    snapshot = snapshot_lineage(graph)
    expected = staleness_fixed_point(snapshot)
    actual = {name.text for name, sym in graph.symbols.items() if sym.stale}
    assert actual == expected, f"stale flags {sorted(actual)} != oracle {sorted(expected)}"


def assert_edges_symmetric(graph) -> None:
    for sym in graph.symbols.values():
        for parent in sym.parents:
            assert sym in parent.children, f"{sym} missing from children of {parent}"
        for child in sym.children:
            assert sym in child.parents, f"{sym} missing from parents of {child}"


# --- path enumeration over loop-free CFGs ---


def enumerate_paths(cfg: Cfg, limit: int = 200_000) -> list[list[int]]:
    paths: list[list[int]] = []

    def walk(node: int, acc: list[int]) -> None:
        acc = acc + [node]
        if node == cfg.exit:
            paths.append(acc)
            if len(paths) > limit:
                raise RuntimeError("path explosion")
            return
        for succ in cfg.succ[node]:
            walk(succ, acc)

    walk(cfg.entry, [])
    return paths


def path_live_oracle(cfg: Cfg) -> frozenset:
    """Union over paths of names read before being written along the path."""
    live = set()
    for path in enumerate_paths(cfg):
        written = set()
        for nid in path:
            node = cfg.nodes[nid]
            live |= node.use - written
            written |= node.defs
    return frozenset(live)


def path_dead_oracle(cfg: Cfg) -> frozenset:
    """Intersection over paths of per-node (DEF − USE) accumulation."""
    dead = None
    for path in enumerate_paths(cfg):
        along = set()
        for nid in path:
            node = cfg.nodes[nid]
            along |= node.defs - node.use
        dead = along if dead is None else dead & along
    return frozenset(dead or set())


# --- random program generators (CellScript source text) ---


def gen_loopfree_cell(rng: random.Random, names: list[str], max_stmts: int = 6,
                      branch_density: float = 0.4, max_branch_points: int = 8,
                      max_depth: int = 2) -> str:
    """Random loop-free cell: assignments, aug-assigns, prints, if/elif/else."""
    budget = {"branches": max_branch_points}

    def expr() -> str:
        terms = []
        for _ in range(rng.randint(1, 2)):
            if rng.random() < 0.6:
                terms.append(rng.choice(names))
            else:
                terms.append(str(rng.randint(0, 9)))
        return " + ".join(terms)

    def simple() -> str:
        roll = rng.random()
        if roll < 0.55:
            return f"{rng.choice(names)} = {expr()}"
        if roll < 0.75:
            return f"{rng.choice(names)} += {expr()}"
        return f"print({expr()})"

    def block(depth: int, n: int) -> list[str]:
        pad = "    " * depth
        lines: list[str] = []
        for _ in range(n):
            if depth < max_depth and budget["branches"] > 0 and rng.random() < branch_density:
                budget["branches"] -= 1
                lines.append(f"{pad}if {rng.choice(names)} > {rng.randint(0, 9)}:")
                lines.extend(block(depth + 1, rng.randint(1, 2)))
                if rng.random() < 0.7:
                    lines.append(f"{pad}else:")
                    lines.extend(block(depth + 1, rng.randint(1, 2)))
            else:
                lines.append(pad + simple())
        return lines

    return "\n".join(block(0, rng.randint(1, max_stmts))) + "\n"


def gen_straightline_cell(rng: random.Random, names: list[str], n_stmts: int = 4) -> str:
    """Straight-line cell with constant subscripts only (rerun-equivalence)."""
    lines = []
    for _ in range(n_stmts):
        roll = rng.random()
        target = rng.choice(names)
        if roll < 0.5:
            src = rng.choice(names)
            lines.append(f"{target} = {src} + {rng.randint(1, 9)}")
        elif roll < 0.7:
            lines.append(f"{target} = [{rng.randint(0, 9)}, {rng.randint(0, 9)}]")
        elif roll < 0.85 and lines:
            lines.append(f"{target} += {rng.randint(1, 5)}")
        else:
            lines.append(f"print({rng.choice(names)})")
    return "\n".join(lines) + "\n"


def seeded_names(k: int = 5) -> list[str]:
    return [f"v{i}" for i in range(k)]
