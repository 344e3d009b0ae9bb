"""Qualified names: the identity of everything the engine tracks.

A symbol is addressed by a base identifier plus a chain of accessors,
e.g. ``df``, ``df.col``, ``lst[3]``, ``cfg["max iter"]``. Attribute access
and string-key subscripts with identifier keys are canonicalised to the
same accessor so that ``d.k`` and ``d["k"]`` name one symbol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

ATTR = "attr"
SUB = "sub"


@dataclass(frozen=True)
class Accessor:
    kind: str  # ATTR or SUB
    key: str | int

    def render(self) -> str:
        if self.kind == ATTR:
            return f".{self.key}"
        if isinstance(self.key, str):
            return f"[{json.dumps(self.key)}]"
        return f"[{self.key}]"


def canonical_accessor(key: str | int) -> Accessor:
    """Attribute form for identifier-like string keys, subscript otherwise."""
    if isinstance(key, str) and key.isidentifier():
        return Accessor(ATTR, key)
    return Accessor(SUB, key)


@dataclass(frozen=True)
class QualifiedName:
    base: str
    path: tuple[Accessor, ...] = ()

    @property
    def text(self) -> str:
        return self.base + "".join(a.render() for a in self.path)

    @property
    def is_base(self) -> bool:
        return not self.path

    def child(self, key: str | int) -> "QualifiedName":
        return QualifiedName(self.base, self.path + (canonical_accessor(key),))

    def parent(self) -> "QualifiedName":
        if not self.path:
            raise ValueError(f"{self.text} has no parent name")
        return QualifiedName(self.base, self.path[:-1])

    def prefixes(self) -> list["QualifiedName"]:
        """All strict prefixes, shortest first (base name included)."""
        return [QualifiedName(self.base, self.path[:i]) for i in range(len(self.path))]

    def __repr__(self) -> str:  # keeps test failures readable
        return f"Q({self.text})"


def qn(base: str, *keys: str | int) -> QualifiedName:
    """Shorthand constructor used pervasively in tests."""
    name = QualifiedName(base)
    for key in keys:
        name = name.child(key)
    return name
