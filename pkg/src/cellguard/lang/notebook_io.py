"""Notebook file formats.

Two interchangeable forms:

* JSON: ``{"cells": [{"id": "c1", "source": "..."}, ...]}``
* plain text: cells delimited by lines starting with ``# %%``; ids are
  auto-assigned ``c1``, ``c2``, ...
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class CellSource:
    cell_id: str
    text: str


def parse_notebook_json(payload: str | dict) -> list[CellSource]:
    doc = json.loads(payload) if isinstance(payload, str) else payload
    if not isinstance(doc, dict) or not isinstance(doc.get("cells"), list):
        raise ValueError('notebook JSON must be {"cells": [...]}')
    cells: list[CellSource] = []
    seen: set[str] = set()
    for i, cell in enumerate(doc["cells"]):
        cell_id = str(cell.get("id", f"c{i + 1}"))
        if cell_id in seen:
            raise ValueError(f"duplicate cell id {cell_id!r}")
        seen.add(cell_id)
        cells.append(CellSource(cell_id, str(cell.get("source", ""))))
    return cells


def parse_notebook_text(text: str) -> list[CellSource]:
    chunks: list[list[str]] = [[]]
    for line in text.split("\n"):
        if line.startswith("# %%"):
            chunks.append([])
        else:
            chunks[-1].append(line)
    cells = []
    index = 0
    for chunk in chunks:
        body = "\n".join(chunk).strip("\n")
        if not body and not cells and chunk is chunks[0]:
            continue  # leading prose-free preamble
        index += 1
        cells.append(CellSource(f"c{index}", body + ("\n" if body else "")))
    return cells


def load_notebook(path: str | Path) -> list[CellSource]:
    raw = Path(path).read_text(encoding="utf-8")
    stripped = raw.lstrip()
    if stripped.startswith("{"):
        return parse_notebook_json(raw)
    return parse_notebook_text(raw)
