"""HTTP/WebSocket surface of the notebook safety engine.

Commands are plain JSON over HTTP; every run also fans out
``{result, report}`` to the session's WebSocket subscribers. A stale cell
is rejected with a 409 StaleWarning envelope unless ``confirm=true``:
the gate is a confirmation, not a hard block, so any-order semantics
survive.
"""

from __future__ import annotations

import asyncio

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from ..interp import cell_repr
from ..lang.notebook_io import parse_notebook_json, parse_notebook_text
from .models import (
    AuditEvent, CellModel, CreateSessionResponse, ErrorEnvelope,
    ExecResultModel, HighlightReportModel, NotebookLoadRequest,
    NotebookLoadResponse, RunResponse, SessionView, UpsertCellRequest,
    UpsertCellResponse,
)
from .sessions import SessionManager, StaleWarning, UnknownSessionError


def _error(status: int, code: str, detail: str, stale_symbols=None) -> JSONResponse:
    body = ErrorEnvelope(error=code, detail=detail, stale_symbols=stale_symbols)
    return JSONResponse(status_code=status, content=body.model_dump(exclude_none=True))


def create_app(manager: SessionManager | None = None) -> FastAPI:
    app = FastAPI(title="cellguard", version="0.1.0")
    app.state.manager = manager or SessionManager()

    def sessions() -> SessionManager:
        return app.state.manager

    @app.exception_handler(UnknownSessionError)
    async def _unknown_session(_, exc: UnknownSessionError):
        return _error(404, "unknown_session", f"no session {exc.args[0]!r}")

    @app.exception_handler(KeyError)
    async def _unknown_cell(_, exc: KeyError):
        return _error(404, "unknown_cell", f"no cell {exc.args[0]!r}")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", response_model=CreateSessionResponse)
    def create_session() -> CreateSessionResponse:
        session = sessions().create_session()
        return CreateSessionResponse(session_id=session.session_id)

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str) -> SessionView:
        session = sessions().get(session_id)
        cells = [
            CellModel(cell_id=cid, source=text, last_counter=session.state.cell_ts(cid))
            for cid, text in session.state.cells.items()
        ]
        return SessionView(
            session_id=session_id, exec_counter=session.state.exec_counter, cells=cells
        )

    @app.put("/sessions/{session_id}/cells/{cell_id}", response_model=UpsertCellResponse)
    def upsert_cell(session_id: str, cell_id: str, request: UpsertCellRequest) -> UpsertCellResponse:
        cid = sessions().upsert_cell(session_id, request.source, cell_id, request.position)
        return UpsertCellResponse(cell_id=cid)

    @app.post("/sessions/{session_id}/cells", response_model=UpsertCellResponse)
    def append_cell(session_id: str, request: UpsertCellRequest) -> UpsertCellResponse:
        cid = sessions().upsert_cell(session_id, request.source, None, request.position)
        return UpsertCellResponse(cell_id=cid)

    @app.delete("/sessions/{session_id}/cells/{cell_id}")
    def delete_cell(session_id: str, cell_id: str) -> dict:
        sessions().delete_cell(session_id, cell_id)
        return {"deleted": cell_id}

    @app.post("/sessions/{session_id}/cells/{cell_id}/run")
    def run_cell(session_id: str, cell_id: str, confirm: bool = False):
        try:
            result, report = sessions().run_cell(session_id, cell_id, confirm_stale=confirm)
        except StaleWarning as warning:
            return _error(409, "stale_warning", str(warning), warning.stale_symbols)
        session = sessions().get(session_id)
        return RunResponse(
            result=ExecResultModel(**result.to_payload()),
            report=HighlightReportModel(**report.to_payload(session.state.cell_ids())),
        )

    @app.get("/sessions/{session_id}/highlights", response_model=HighlightReportModel)
    def get_highlights(session_id: str) -> HighlightReportModel:
        session = sessions().get(session_id)
        report = sessions().get_highlights(session_id)
        return HighlightReportModel(**report.to_payload(session.state.cell_ids()))

    @app.get("/sessions/{session_id}/lineage")
    def get_lineage(session_id: str) -> dict:
        return sessions().get(session_id).state.lineage.dump()

    @app.get("/sessions/{session_id}/globals")
    def get_globals(session_id: str) -> dict:
        state = sessions().get(session_id).state
        return {name: cell_repr(value) for name, value in state.globals.items()}

    @app.get("/sessions/{session_id}/audit", response_model=list[AuditEvent])
    def get_audit(session_id: str) -> list[AuditEvent]:
        return [AuditEvent(**event) for event in sessions().get(session_id).audit_log]

    @app.post("/sessions/{session_id}/notebook", response_model=NotebookLoadResponse)
    def load_notebook(session_id: str, request: NotebookLoadRequest) -> NotebookLoadResponse:
        if request.cells is not None:
            cells = parse_notebook_json({"cells": request.cells})
        elif request.text is not None:
            cells = parse_notebook_text(request.text)
        else:
            return _error(422, "invalid_notebook", "provide either 'cells' or 'text'")
        ids = [
            sessions().upsert_cell(session_id, cell.text, cell.cell_id) for cell in cells
        ]
        return NotebookLoadResponse(cell_ids=ids)

    @app.websocket("/sessions/{session_id}/ws")
    async def session_ws(websocket: WebSocket, session_id: str):
        try:
            sessions().get(session_id)
        except UnknownSessionError:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        sub = sessions().subscribe(session_id, queue, asyncio.get_running_loop())
        try:
            while True:
                payload = await queue.get()
                await websocket.send_json(payload)
        except WebSocketDisconnect:
            pass
        finally:
            sessions().unsubscribe(session_id, sub)

    return app


app = create_app()
