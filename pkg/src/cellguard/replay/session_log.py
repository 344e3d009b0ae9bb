"""Execution logs: ordered (counter, source) records, one JSON object per line."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class LogEntry:
    counter: int
    source: str


@dataclass
class SessionLog:
    entries: list[LogEntry]

    def validate(self) -> None:
        prev = 0
        for entry in self.entries:
            if entry.counter <= prev:
                raise ValueError(f"counters must strictly increase (saw {entry.counter} after {prev})")
            if not entry.source:
                raise ValueError(f"entry {entry.counter} has empty source")
            prev = entry.counter

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"counter": e.counter, "source": e.source}) + "\n" for e in self.entries
        )

    @staticmethod
    def from_jsonl(text: str) -> "SessionLog":
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: invalid JSON ({exc})") from None
            entries.append(LogEntry(int(obj["counter"]), str(obj["source"])))
        log = SessionLog(entries)
        log.validate()
        return log

    @staticmethod
    def load(path: str | Path) -> "SessionLog":
        return SessionLog.from_jsonl(Path(path).read_text(encoding="utf-8"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")
