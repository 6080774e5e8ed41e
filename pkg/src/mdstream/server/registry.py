"""Trajectory registry: download/copy, scan, index sidecar, metadata store.

Every registered trajectory lives in its own directory under
data_dir/trajectories/<id>/ holding the data file, the MDIX sidecar and a
meta.json. Registration is all-or-nothing: failures remove the partial
directory. Records are immutable once written, so the registry needs a
lock only around its in-memory table.
"""

from __future__ import annotations

import datetime
import json
import logging
import os
import secrets
import shutil
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlparse

import requests

from mdstream.errors import DownloadError, NotFoundError, UnsupportedFormatError
from mdstream.server.config import ServerConfig
from mdstream.traj import (
    FrameIndex,
    TrajectoryMeta,
    TrajectoryReader,
    read_mdix,
    scan_trajectory,
    write_mdix,
)
from mdstream.traj.reader import detect_format

log = logging.getLogger("mdstream.registry")

_DOWNLOAD_CHUNK = 1024 * 1024


def new_id() -> str:
    # 16 random bytes -> 22 URL-safe chars, unguessable by default
    return secrets.token_urlsafe(16)


@dataclass(frozen=True)
class TrajectoryRecord:
    id: str
    name: str
    description: str
    source: str
    storage_path: Path
    meta: TrajectoryMeta
    index: FrameIndex
    created_at: str
    created_at_ns: int

    def meta_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "source": self.source,
            "format": self.meta.format,
            "n_atoms": self.meta.n_atoms,
            "n_frames": self.meta.n_frames,
            "timestep_ps": self.meta.timestep_ps,
            "created_at": self.created_at,
        }


def _write_json_atomic(path: Path, payload: dict) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


class TrajectoryRegistry:
    def __init__(self, config: ServerConfig):
        self.config = config
        self._records: dict[str, TrajectoryRecord] = {}
        self._lock = threading.RLock()
        config.trajectories_dir.mkdir(parents=True, exist_ok=True)
        self._load_existing()

    # -- startup ---------------------------------------------------------

    def _load_existing(self) -> None:
        for record_dir in sorted(self.config.trajectories_dir.iterdir()):
            meta_path = record_dir / "meta.json"
            if not record_dir.is_dir() or not meta_path.exists():
                continue
            try:
                record = self._load_record(record_dir)
            except Exception as exc:
                log.warning("skipping unreadable record %s: %s", record_dir.name, exc)
                continue
            self._records[record.id] = record

    def _load_record(self, record_dir: Path) -> TrajectoryRecord:
        stored = json.loads((record_dir / "meta.json").read_text())
        data_path = record_dir / stored["file_name"]
        index = read_mdix(record_dir / "data.mdix")
        file_size = data_path.stat().st_size
        if file_size != stored["file_size"]:
            raise UnsupportedFormatError(
                f"{data_path} changed size since registration "
                f"({file_size} != {stored['file_size']})"
            )
        index.validate_against_size(file_size)
        meta = TrajectoryMeta(
            n_atoms=stored["n_atoms"],
            n_frames=stored["n_frames"],
            format=stored["format"],
            timestep_ps=stored["timestep_ps"],
            file_size=file_size,
        )
        return TrajectoryRecord(
            id=stored["id"],
            name=stored["name"],
            description=stored["description"],
            source=stored["source"],
            storage_path=data_path,
            meta=meta,
            index=index,
            created_at=stored["created_at"],
            created_at_ns=stored.get("created_at_ns", 0),
        )

    # -- registration ----------------------------------------------------

    def register(self, url_or_path: str, name: str, description: str, source: str) -> TrajectoryRecord:
        record_id = new_id()
        record_dir = self.config.trajectories_dir / record_id
        record_dir.mkdir(parents=True)
        try:
            data_path = self._fetch_data(url_or_path, record_dir)
            fmt = detect_format(data_path)
            final_path = record_dir / f"data.{fmt.lower()}"
            os.replace(data_path, final_path)
            meta, index = scan_trajectory(final_path, format=fmt)
            write_mdix(index, record_dir / "data.mdix")
            now = time.time_ns()
            record = TrajectoryRecord(
                id=record_id,
                name=name,
                description=description,
                source=source,
                storage_path=final_path,
                meta=meta,
                index=index,
                created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
                created_at_ns=now,
            )
            stored = record.meta_json() | {
                "file_name": final_path.name,
                "file_size": meta.file_size,
                "created_at_ns": now,
            }
            _write_json_atomic(record_dir / "meta.json", stored)
        except Exception:
            shutil.rmtree(record_dir, ignore_errors=True)
            raise
        with self._lock:
            self._records[record_id] = record
        log.info(
            "registered %s (%s, %d frames, %d atoms) from %s",
            record_id, meta.format, meta.n_frames, meta.n_atoms, url_or_path,
        )
        return record

    def _fetch_data(self, url_or_path: str, record_dir: Path) -> Path:
        target = record_dir / "data.part"
        scheme = urlparse(url_or_path).scheme
        if scheme in ("http", "https"):
            self._download(url_or_path, target)
        elif scheme == "":
            src = Path(url_or_path).resolve()
            data_root = self.config.data_dir.resolve()
            if not src.is_relative_to(data_root):
                raise DownloadError(
                    f"local path {url_or_path} is outside the data directory"
                )
            if not src.is_file():
                raise DownloadError(f"local path {url_or_path} does not exist")
            if src.stat().st_size > self.config.max_download_bytes:
                raise DownloadError("file exceeds the configured size cap")
            shutil.copyfile(src, target)
        else:
            raise DownloadError(f"unsupported URL scheme {scheme!r}")
        return target

    def _download(self, url: str, target: Path) -> None:
        cap = self.config.max_download_bytes
        try:
            with requests.get(url, stream=True, timeout=60) as resp:
                if resp.status_code != 200:
                    raise DownloadError(f"download failed: HTTP {resp.status_code}")
                declared = resp.headers.get("Content-Length")
                if declared is not None and int(declared) > cap:
                    raise DownloadError("remote file exceeds the configured size cap")
                written = 0
                with open(target, "wb") as out:
                    for chunk in resp.iter_content(chunk_size=_DOWNLOAD_CHUNK):
                        written += len(chunk)
                        if written > cap:
                            raise DownloadError(
                                "download exceeded the configured size cap"
                            )
                        out.write(chunk)
        except requests.RequestException as exc:
            raise DownloadError(f"download failed: {exc}") from exc

    # -- access ----------------------------------------------------------

    def get(self, record_id: str) -> TrajectoryRecord:
        with self._lock:
            record = self._records.get(record_id)
        if record is None:
            raise NotFoundError(f"no trajectory with id {record_id!r}")
        return record

    def list_records(self) -> list[TrajectoryRecord]:
        with self._lock:
            records = list(self._records.values())
        records.sort(key=lambda r: (r.created_at_ns, r.id), reverse=True)
        return records

    def open_reader(self, record_id: str) -> TrajectoryReader:
        record = self.get(record_id)
        return TrajectoryReader(record.storage_path, meta=record.meta, index=record.index)
