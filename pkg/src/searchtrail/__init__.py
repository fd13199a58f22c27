"""Search-context tracker: store, HTTP service, capture client, analysis."""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (  # noqa: F401
    HistoryQuery,
    QueryLog,
    Resource,
    ServiceResponse,
    TrackerError,
    normalize_query,
)
from .store import Store  # noqa: F401
from .service import SearchLogService  # noqa: F401
from .client import SessionRecorder  # noqa: F401
