"""Pydantic request/response models for the session service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class CreateSessionResponse(BaseModel):
    session_id: str


class UpsertCellRequest(BaseModel):
    source: str
    position: int | None = None


class UpsertCellResponse(BaseModel):
    cell_id: str


class CellModel(BaseModel):
    cell_id: str
    source: str
    last_counter: int = 0


class SessionView(BaseModel):
    session_id: str
    exec_counter: int
    cells: list[CellModel]


class ExecResultModel(BaseModel):
    counter: int
    status: str
    error: str | None = None
    error_statement: int | None = None
    stdout: str = ""
    events: list[dict] = Field(default_factory=list)


class HighlightReportModel(BaseModel):
    counter: int
    stale: list[str]
    fresh: list[str]
    refresher: list[str]
    new_fresh: list[str]
    new_refresher: list[str]


class RunResponse(BaseModel):
    result: ExecResultModel
    report: HighlightReportModel


class ErrorEnvelope(BaseModel):
    error: str
    detail: str
    stale_symbols: list[str] | None = None


class AuditEvent(BaseModel):
    counter: int
    cell_id: str
    stale_symbols: list[str]


class NotebookLoadRequest(BaseModel):
    text: str | None = None
    cells: list[dict] | None = None


class NotebookLoadResponse(BaseModel):
    cell_ids: list[str]
