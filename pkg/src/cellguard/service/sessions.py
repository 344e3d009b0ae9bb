"""Session registry: one notebook engine per session, serialized commands.

A per-session lock orders all mutations; highlight reads return the
report computed after the most recent execution, so clients never observe
a half-updated state. Executions are pushed to WebSocket subscribers with
strictly increasing counters.
"""

from __future__ import annotations

import asyncio
import threading
import uuid
from dataclasses import dataclass, field

from ..highlights import HighlightReport, compute_report, empty_report
from ..interp import ExecResult, NotebookState


class UnknownSessionError(KeyError):
    pass


class StaleWarning(Exception):
    """Raised instead of executing a stale cell without confirmation."""

    def __init__(self, cell_id: str, stale_symbols: list[str]):
        super().__init__(f"cell {cell_id} has live stale references: {', '.join(stale_symbols)}")
        self.cell_id = cell_id
        self.stale_symbols = stale_symbols


@dataclass
class _Subscriber:
    queue: asyncio.Queue
    loop: asyncio.AbstractEventLoop


@dataclass
class Session:
    session_id: str
    state: NotebookState
    latest_report: HighlightReport
    lock: threading.Lock = field(default_factory=threading.Lock)
    audit_log: list[dict] = field(default_factory=list)
    subscribers: list[_Subscriber] = field(default_factory=list)


class SessionManager:
    def __init__(self, refresher: str = "fast"):
        self.refresher = refresher
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # --- lifecycle ---

    def create_session(self) -> Session:
        session = Session(uuid.uuid4().hex, NotebookState(trace=True), empty_report())
        with self._registry_lock:
            self._sessions[session.session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    # --- commands ---

    def upsert_cell(self, session_id: str, source: str, cell_id: str | None = None, position: int | None = None) -> str:
        session = self.get(session_id)
        with session.lock:
            return session.state.upsert_cell(source, cell_id, position)

    def delete_cell(self, session_id: str, cell_id: str) -> None:
        session = self.get(session_id)
        with session.lock:
            session.state.remove_cell(cell_id)

    def run_cell(self, session_id: str, cell_id: str, confirm_stale: bool = False) -> tuple[ExecResult, HighlightReport]:
        session = self.get(session_id)
        with session.lock:
            state = session.state
            if cell_id not in state.cells:
                raise KeyError(cell_id)
            if cell_id in session.latest_report.stale and not confirm_stale:
                raise StaleWarning(cell_id, session.latest_report.stale_symbol_names(cell_id))
            was_stale = cell_id in session.latest_report.stale
            if was_stale:
                session.audit_log.append(
                    {
                        "counter": state.exec_counter + 1,
                        "cell_id": cell_id,
                        "stale_symbols": session.latest_report.stale_symbol_names(cell_id),
                    }
                )
            result = state.execute_cell(cell_id)
            report = compute_report(state, previous=session.latest_report, refresher=self.refresher)
            session.latest_report = report
            self._publish(session, result, report)
            return result, report

    def get_highlights(self, session_id: str) -> HighlightReport:
        return self.get(session_id).latest_report

    # --- websocket fan-out ---

    def subscribe(self, session_id: str, queue: asyncio.Queue, loop: asyncio.AbstractEventLoop) -> _Subscriber:
        session = self.get(session_id)
        sub = _Subscriber(queue, loop)
        session.subscribers.append(sub)
        return sub

    def unsubscribe(self, session_id: str, sub: _Subscriber) -> None:
        try:
            self.get(session_id).subscribers.remove(sub)
        except (UnknownSessionError, ValueError):
            pass

    def _publish(self, session: Session, result: ExecResult, report: HighlightReport) -> None:
        payload = {
            "type": "run",
            "result": result.to_payload(),
            "report": report.to_payload(session.state.cell_ids()),
        }
        for sub in list(session.subscribers):
            sub.loop.call_soon_threadsafe(sub.queue.put_nowait, payload)
