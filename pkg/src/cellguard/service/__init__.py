"""FastAPI service wrapping the engine: sessions, cells, runs, highlights."""

from .app import create_app
from .sessions import SessionManager, StaleWarning, UnknownSessionError

__all__ = ["SessionManager", "StaleWarning", "UnknownSessionError", "create_app"]
