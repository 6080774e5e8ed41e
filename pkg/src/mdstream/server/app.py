"""HTTP surface of the streaming service.

Endpoints (JSON unless noted):
  GET  /api/trajectories                  registered trajectory metadata
  POST /api/trajectories                  {url, name, description, source}
  GET  /api/traj/{id}/meta
  GET  /api/traj/{id}/frame/{i}           binary frame payload (octet-stream,
                                          X-MDS-Wire: 1; ?atoms=csv&stride=n)
  POST /api/traj/{id}/trace               {kind, atoms, ...} -> time trace
  GET  /api/sessions                      metadata only, newest first
  POST /api/sessions                      {name, description, source, state,
                                          trajectories}
  GET  /api/session/{id}                  metadata plus state blob
"""

from __future__ import annotations

import logging
import time

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from mdstream.analysis import TraceOrder as analysis_order
from mdstream.errors import (
    CorruptFileError,
    DownloadError,
    InvalidRangeError,
    MdstreamError,
    NotFoundError,
    OutOfRangeError,
    SelectionError,
    TrajectoryMatchError,
    UnsupportedFormatError,
)
from mdstream.server.config import ServerConfig
from mdstream.server.service import StreamService
from mdstream.server.sessions import SessionValidationError, StateTooLargeError
from mdstream.server.wire import WIRE_VERSION

log = logging.getLogger("mdstream.http")

_STATUS_BY_ERROR = [
    (NotFoundError, 404),
    (OutOfRangeError, 416),
    (SelectionError, 400),
    (InvalidRangeError, 400),
    (TrajectoryMatchError, 400),
    (SessionValidationError, 422),
    (StateTooLargeError, 413),
    (DownloadError, 502),
    (UnsupportedFormatError, 415),
    (CorruptFileError, 422),
]


class RegisterRequest(BaseModel):
    url: str
    name: str = ""
    description: str = ""
    source: str = ""


class SessionRequest(BaseModel):
    name: str
    description: str = ""
    source: str = ""
    state: str
    trajectories: list[str] = Field(default_factory=list)


def _status_for(exc: MdstreamError) -> int:
    for etype, status in _STATUS_BY_ERROR:
        if isinstance(exc, etype):
            return status
    return 500


def create_app(config: ServerConfig, service: StreamService | None = None) -> FastAPI:
    app = FastAPI(title="mdstream", version="0.1.0", docs_url=None, redoc_url=None)
    svc = service or StreamService(config)
    app.state.service = svc

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def access_log(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        size = response.headers.get("content-length", "-")
        log.info(
            "%s %s %d %s %.1fms",
            request.method, request.url.path, response.status_code, size, elapsed_ms,
        )
        return response

    @app.exception_handler(MdstreamError)
    async def mdstream_error_handler(request: Request, exc: MdstreamError):
        return JSONResponse(status_code=_status_for(exc), content={"detail": str(exc)})

    @app.get("/api/trajectories")
    def list_trajectories():
        return svc.list_trajectories()

    @app.post("/api/trajectories", status_code=201)
    def register_trajectory(body: RegisterRequest):
        record = svc.registry.register(body.url, body.name, body.description, body.source)
        return record.meta_json()

    @app.get("/api/traj/{record_id}/meta")
    def get_meta(record_id: str):
        return svc.get_meta(record_id)

    @app.get("/api/traj/{record_id}/frame/{i}")
    def get_frame(record_id: str, i: int, atoms: str | None = None, stride: int = 1):
        subset = None
        if atoms is not None and atoms != "":
            try:
                subset = [int(a) for a in atoms.split(",")]
            except ValueError:
                raise SelectionError(f"malformed atoms list {atoms!r}") from None
        payload = svc.get_frame(record_id, i, atom_subset=subset, stride=stride)
        return Response(
            content=payload,
            media_type="application/octet-stream",
            headers={"X-MDS-Wire": WIRE_VERSION},
        )

    @app.post("/api/traj/{record_id}/trace")
    def compute_trace(record_id: str, spec: dict):
        order = spec.pop("sort", None)
        filt = spec.pop("filter", None)
        if order is not None:
            try:
                order = str(order)
                _ = analysis_order(order)
            except ValueError:
                raise SelectionError(f"unknown sort order {order!r}") from None
        value_range = None
        if filt is not None:
            if (
                not isinstance(filt, dict)
                or "min" not in filt
                or "max" not in filt
            ):
                raise SelectionError('filter must be {"min": ..., "max": ...}')
            value_range = (float(filt["min"]), float(filt["max"]))
        body, hit = svc.compute_trace(record_id, spec, order=order, value_range=value_range)
        return JSONResponse(content=body, headers={"X-Cache": "hit" if hit else "miss"})

    @app.get("/api/sessions")
    def list_sessions():
        return svc.list_sessions()

    @app.post("/api/sessions", status_code=201)
    def save_session(body: SessionRequest):
        meta = svc.save_session(
            body.name, body.description, body.source, body.state, body.trajectories
        )
        return meta.to_json()

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str):
        return svc.get_session(session_id)

    @app.get("/api/health")
    def health():
        return {"status": "ok", "cache": svc.cache.stats()}

    return app
