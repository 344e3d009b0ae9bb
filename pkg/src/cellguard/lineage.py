"""Shadow lineage metadata: timestamps, dependency edges, staleness flags.

Every notebook symbol (possibly qualified: ``x``, ``x.a``, ``x[0]``) gets a
shadow record kept alongside, never inside, the runtime value. A symbol is
stale when some parent is newer than it or itself stale; the flag is stored
explicitly and updated incrementally, since the recursive predicate cannot
be read off timestamps alone.

An alias registry maps runtime object identity to every symbol currently
bound to that object, so a mutation observed through one name bumps all of
its aliases.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field

from .lang.names import QualifiedName


MISSING = object()  # "no runtime value supplied" (None is a legal cell value)


class UnknownSymbolError(Exception):
    pass


class UnknownObjectError(Exception):
    """Mutation reported for an unregistered object: tracer bug."""


class ShadowSymbol:
    __slots__ = ("name", "timestamp", "parents", "children", "stale", "_obj_ref", "obj_id", "__weakref__")

    def __init__(self, name: QualifiedName, timestamp: int):
        self.name = name
        self.timestamp = timestamp
        self.parents: set[ShadowSymbol] = set()
        self.children: set[ShadowSymbol] = set()
        self.stale = False
        self._obj_ref = None
        self.obj_id: int | None = None  # registry key while aliased to a mutable object

    def set_object(self, value) -> None:
        try:
            self._obj_ref = weakref.ref(value)
        except TypeError:
            self._obj_ref = (value,)  # immutables are kept directly

    def clear_object(self) -> None:
        self._obj_ref = None

    @property
    def object_ref(self):
        if self._obj_ref is None:
            return None
        if isinstance(self._obj_ref, tuple):
            return self._obj_ref[0]
        return self._obj_ref()

    def locally_outdated(self) -> bool:
        return any(p.stale or p.timestamp > self.timestamp for p in self.parents)

    def __repr__(self) -> str:
        flag = "stale" if self.stale else "ok"
        return f"<{self.name.text}@{self.timestamp} {flag}>"


@dataclass
class RegistryEntry:
    obj: object
    symbols: dict[QualifiedName, ShadowSymbol] = field(default_factory=dict)


class LineageGraph:
    """Single-session lineage graph; all operations are totally ordered."""

    def __init__(self) -> None:
        self.symbols: dict[QualifiedName, ShadowSymbol] = {}
        self.registry: dict[int, RegistryEntry] = {}
        self._members: dict[QualifiedName, set[QualifiedName]] = {}
        self.last_propagation_visits = 0

    # --- lookups ---

    def lookup(self, name: QualifiedName) -> ShadowSymbol | None:
        return self.symbols.get(name)

    def aliases_of(self, object_id: int) -> list[ShadowSymbol]:
        entry = self.registry.get(object_id)
        return list(entry.symbols.values()) if entry else []

    # --- core updates ---

    def apply_assignment(
        self,
        target: QualifiedName,
        rhs_uses: set[QualifiedName],
        counter: int,
        value=MISSING,
        mutable: bool = False,
        augment: bool = False,
    ) -> ShadowSymbol:
        """Bind ``target`` at ``counter`` with dependencies ``rhs_uses``.

        Plain assignment replaces the parent set (old dataflow is severed);
        ``augment=True`` unions instead (aug-assign adds to it). Unknown
        names in ``rhs_uses`` are dropped, not invented.
        """
        parents = {self.symbols[u] for u in rhs_uses if u in self.symbols}
        sym = self.symbols.get(target)
        if sym is None:
            sym = ShadowSymbol(target, counter)
            self.symbols[target] = sym
            self._index_member(target)
        else:
            if value is not MISSING and sym.object_ref is not value:
                self._drop_members(target)
            self._unregister(sym)
        parents.discard(sym)  # no self-edges from `x op= x`-style reads
        if augment:
            parents |= sym.parents
        was_stale = sym.stale
        self._set_parents(sym, parents)
        sym.timestamp = max(sym.timestamp, counter)
        sym.stale = any(p.stale for p in sym.parents)
        if value is not MISSING:
            sym.set_object(value)
            if mutable:
                self._register(sym, value)
        if was_stale or sym.stale:
            # updates that clear or inherit staleness can leave descendant
            # flags without grounding (even cyclically self-supporting), so
            # re-establish the least fixed point; clean-to-clean updates only
            # ever add staleness downstream, which plain propagation covers
            self._recompute_stale_flags()
        else:
            self.propagate_staleness(sym)
        return sym

    def touch_member(self, name: QualifiedName, container_ts: int, value=MISSING, mutable: bool = False) -> ShadowSymbol:
        """First read of a member: create its shadow record lazily."""
        sym = self.symbols.get(name)
        if sym is None:
            sym = ShadowSymbol(name, container_ts)
            self.symbols[name] = sym
            self._index_member(name)
            if value is not MISSING:
                sym.set_object(value)
                if mutable:
                    self._register(sym, value)
        return sym

    def update_object(self, name: QualifiedName, value, mutable: bool) -> None:
        """Keep object identity and the alias registry in sync for a binding
        that executes without lineage instrumentation (loop repeats)."""
        sym = self.symbols.get(name)
        if sym is None:
            return
        if sym.object_ref is not value:
            self._drop_members(name)
            self._unregister(sym)
            sym.set_object(value)
            if mutable:
                self._register(sym, value)

    def record_mutation(self, object_id: int, extra_parents: set[QualifiedName], counter: int) -> set[ShadowSymbol]:
        """Bump every alias of a mutated object, adding new dataflow edges."""
        entry = self.registry.get(object_id)
        if entry is None:
            raise UnknownObjectError(f"mutation of unregistered object {object_id}")
        parents = {self.symbols[u] for u in extra_parents if u in self.symbols}
        bumped: set[ShadowSymbol] = set()
        touched_stale = False
        for sym in list(entry.symbols.values()):
            was_stale = sym.stale
            self._set_parents(sym, (sym.parents | parents) - {sym})
            sym.timestamp = max(sym.timestamp, counter)
            sym.stale = any(p.stale for p in sym.parents)
            touched_stale = touched_stale or was_stale or sym.stale
            bumped.add(sym)
        if touched_stale:
            self._recompute_stale_flags()
        else:
            for sym in bumped:
                self.propagate_staleness(sym)
        return bumped

    def propagate_staleness(self, updated: ShadowSymbol) -> set[ShadowSymbol]:
        """DFS from the children of a freshly-updated symbol, marking every
        descendant whose staleness predicate now holds. Already-stale
        descendants are not re-visited, which also terminates cycles."""
        newly: set[ShadowSymbol] = set()
        visited: set[ShadowSymbol] = set()
        stack = list(updated.children)
        visits = 0
        while stack:
            sym = stack.pop()
            if sym in visited or sym.stale:
                continue
            visited.add(sym)
            visits += 1
            if sym.locally_outdated():
                sym.stale = True
                newly.add(sym)
                stack.extend(sym.children)
        self.last_propagation_visits = visits
        return newly

    def delete_symbol(self, name: QualifiedName) -> None:
        """Explicit teardown: edges, registry entry, namespace children."""
        if name not in self.symbols:
            raise UnknownSymbolError(f"unknown symbol {name.text}")
        self._remove(name)
        self._recompute_stale_flags()

    def rebind_cleanup(self, name: QualifiedName) -> None:
        """Drop a symbol silently (e.g. loop variable shadowing)."""
        if name in self.symbols:
            self._remove(name)
            self._recompute_stale_flags()

    # --- internals ---

    def _remove(self, name: QualifiedName) -> None:
        sym = self.symbols.pop(name)
        self._drop_members(name)
        for p in sym.parents:
            p.children.discard(sym)
        for c in sym.children:
            c.parents.discard(sym)
        sym.parents.clear()
        sym.children.clear()
        self._unregister(sym)
        sym.clear_object()
        if not name.is_base:
            container = name.parent()
            members = self._members.get(container)
            if members is not None:
                members.discard(name)

    def _drop_members(self, name: QualifiedName) -> None:
        for child in list(self._members.get(name, ())):
            if child in self.symbols:
                self._remove(child)
        self._members.pop(name, None)

    def _index_member(self, name: QualifiedName) -> None:
        if not name.is_base:
            self._members.setdefault(name.parent(), set()).add(name)

    def _set_parents(self, sym: ShadowSymbol, parents: set[ShadowSymbol]) -> None:
        for old in sym.parents - parents:
            old.children.discard(sym)
        for new in parents - sym.parents:
            new.children.add(sym)
        sym.parents = set(parents)

    def _register(self, sym: ShadowSymbol, value) -> None:
        oid = id(value)
        entry = self.registry.get(oid)
        if entry is None:
            entry = RegistryEntry(value)
            self.registry[oid] = entry
        entry.symbols[sym.name] = sym
        sym.obj_id = oid

    def _unregister(self, sym: ShadowSymbol) -> None:
        if sym.obj_id is None:
            return
        entry = self.registry.get(sym.obj_id)
        if entry is not None:
            entry.symbols.pop(sym.name, None)
            if not entry.symbols:
                del self.registry[sym.obj_id]
        sym.obj_id = None

    def _recompute_stale_flags(self) -> None:
        """Deletion can make a formerly-stale symbol clean again; restore
        the least fixed point of the staleness predicate."""
        worklist: list[ShadowSymbol] = []
        for sym in self.symbols.values():
            sym.stale = any(p.timestamp > sym.timestamp for p in sym.parents)
            if sym.stale:
                worklist.append(sym)
        while worklist:
            sym = worklist.pop()
            for child in sym.children:
                if not child.stale:
                    child.stale = True
                    worklist.append(child)

    # --- debug dump (golden tests, UI inspector) ---

    def dump(self) -> dict:
        symbols = []
        for name in sorted(self.symbols, key=lambda n: n.text):
            sym = self.symbols[name]
            symbols.append(
                {
                    "name": name.text,
                    "ts": sym.timestamp,
                    "stale": sym.stale,
                    "parents": sorted(p.name.text for p in sym.parents),
                }
            )
        return {"symbols": symbols}
