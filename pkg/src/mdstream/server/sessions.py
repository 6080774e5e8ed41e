"""Durable session store: named, shareable visualization state.

A session is two files under data_dir/sessions/: <id>.state (the opaque
state blob, verbatim bytes) and <id>.json (name/description/source
provenance plus referenced trajectory ids). The blob is written and
fsynced before the metadata rename, so after a crash a session either
fully exists or not at all; orphaned blobs are swept at startup.
"""

from __future__ import annotations

import datetime
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from mdstream.errors import MdstreamError, NotFoundError
from mdstream.server.config import ServerConfig
from mdstream.server.registry import new_id

log = logging.getLogger("mdstream.sessions")


class SessionValidationError(MdstreamError):
    """Referenced trajectory missing or state blob oversized."""


class StateTooLargeError(MdstreamError):
    pass


@dataclass(frozen=True)
class SessionMeta:
    id: str
    name: str
    description: str
    source: str
    trajectories: tuple[str, ...]
    created_at: str
    created_at_ns: int
    state_bytes: int

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "source": self.source,
            "trajectories": list(self.trajectories),
            "created_at": self.created_at,
            "state_bytes": self.state_bytes,
        }


class SessionStore:
    def __init__(self, config: ServerConfig,
                 trajectory_exists: Callable[[str], bool]):
        self.config = config
        self._trajectory_exists = trajectory_exists
        self._lock = threading.RLock()
        self._metas: dict[str, SessionMeta] = {}
        config.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._load_existing()

    def _load_existing(self) -> None:
        seen_states = set()
        for meta_path in sorted(self.config.sessions_dir.glob("*.json")):
            try:
                stored = json.loads(meta_path.read_text())
                meta = SessionMeta(
                    id=stored["id"],
                    name=stored["name"],
                    description=stored["description"],
                    source=stored["source"],
                    trajectories=tuple(stored["trajectories"]),
                    created_at=stored["created_at"],
                    created_at_ns=stored["created_at_ns"],
                    state_bytes=stored["state_bytes"],
                )
            except (KeyError, ValueError) as exc:
                log.warning("skipping unreadable session %s: %s", meta_path.name, exc)
                continue
            state_path = self._state_path(meta.id)
            if not state_path.exists():
                log.warning("session %s has no state blob; dropping", meta.id)
                meta_path.unlink(missing_ok=True)
                continue
            seen_states.add(state_path.name)
            self._metas[meta.id] = meta
        # a crash between blob write and metadata rename leaves an orphan blob
        for state_path in self.config.sessions_dir.glob("*.state"):
            if state_path.name not in seen_states:
                log.info("sweeping orphaned session blob %s", state_path.name)
                state_path.unlink(missing_ok=True)

    def _state_path(self, session_id: str) -> Path:
        return self.config.sessions_dir / f"{session_id}.state"

    def _meta_path(self, session_id: str) -> Path:
        return self.config.sessions_dir / f"{session_id}.json"

    def save(self, name: str, description: str, source: str, state: str,
             trajectories: list[str]) -> SessionMeta:
        state_bytes = state.encode("utf-8")
        if len(state_bytes) > self.config.max_session_bytes:
            raise StateTooLargeError(
                f"session state of {len(state_bytes)} bytes exceeds the "
                f"{self.config.max_session_bytes} byte limit"
            )
        for tid in trajectories:
            if not self._trajectory_exists(tid):
                raise SessionValidationError(
                    f"session references unknown trajectory {tid!r}"
                )
        session_id = new_id()
        meta = SessionMeta(
            id=session_id,
            name=name,
            description=description,
            source=source,
            trajectories=tuple(trajectories),
            created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
            created_at_ns=time.time_ns(),
            state_bytes=len(state_bytes),
        )
        state_path = self._state_path(session_id)
        tmp_state = state_path.with_suffix(".state.tmp")
        with open(tmp_state, "wb") as fh:
            fh.write(state_bytes)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_state, state_path)
        # metadata goes last: its presence marks the session complete
        meta_payload = meta.to_json() | {"created_at_ns": meta.created_at_ns}
        meta_path = self._meta_path(session_id)
        tmp_meta = meta_path.with_suffix(".json.tmp")
        try:
            with open(tmp_meta, "w") as fh:
                json.dump(meta_payload, fh)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_meta, meta_path)
        except Exception:
            state_path.unlink(missing_ok=True)
            tmp_meta.unlink(missing_ok=True)
            raise
        with self._lock:
            self._metas[session_id] = meta
        log.info("saved session %s (%r, %d bytes)", session_id, name, len(state_bytes))
        return meta

    def get(self, session_id: str) -> tuple[SessionMeta, str]:
        with self._lock:
            meta = self._metas.get(session_id)
        if meta is None:
            raise NotFoundError(f"no session with id {session_id!r}")
        state = self._state_path(session_id).read_text("utf-8")
        return meta, state

    def list_metas(self) -> list[SessionMeta]:
        with self._lock:
            metas = list(self._metas.values())
        metas.sort(key=lambda m: (m.created_at_ns, m.id), reverse=True)
        return metas
