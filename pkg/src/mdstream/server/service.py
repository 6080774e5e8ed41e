"""Service layer tying registry, frame cache, sessions and analysis together.

The HTTP app is a thin shell over this class, so the CLI and the tests can
drive identical logic without a socket. Frame payloads are cached whole
(per trajectory+frame); atom subsets are sliced out of the cached payload
so subset requests share cache entries.
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict

import numpy as np

from mdstream import analysis
from mdstream.analysis import MeasurementSpec
from mdstream.errors import OutOfRangeError, SelectionError
from mdstream.model import Frame
from mdstream.server.cache import FrameCache
from mdstream.server.config import ServerConfig
from mdstream.server.registry import TrajectoryRecord, TrajectoryRegistry
from mdstream.server.sessions import SessionMeta, SessionStore
from mdstream.server.wire import WIRE_HEADER, decode_frame_payload, encode_frame

_TRACE_CACHE_ENTRIES = 256


class _CachedFrameReader:
    """Reader facade that serves frames through the payload cache."""

    def __init__(self, service: "StreamService", record: TrajectoryRecord):
        self.service = service
        self.record = record
        self.meta = record.meta
        self._reader = None

    def read_frame(self, i: int) -> Frame:
        payload = self.service._frame_payload_cached(self.record, i, self._disk_reader)
        time_ps, box, coords = decode_frame_payload(payload)
        return Frame(frame_number=i, time_ps=time_ps, box=box, coords=coords)

    def _disk_reader(self):
        if self._reader is None:
            self._reader = self.service.registry.open_reader(self.record.id)
        return self._reader

    def close(self):
        if self._reader is not None:
            self._reader.close()
            self._reader = None


class StreamService:
    def __init__(self, config: ServerConfig):
        self.config = config
        config.data_dir.mkdir(parents=True, exist_ok=True)
        self.registry = TrajectoryRegistry(config)
        self.cache = FrameCache(config.cache_bytes)
        self.sessions = SessionStore(config, trajectory_exists=self._has_trajectory)
        self._trace_cache: OrderedDict[tuple, dict] = OrderedDict()
        self._trace_lock = threading.Lock()

    def _has_trajectory(self, record_id: str) -> bool:
        try:
            self.registry.get(record_id)
            return True
        except Exception:
            return False

    # -- frames ------------------------------------------------------------

    def _frame_payload_cached(self, record: TrajectoryRecord, i: int, reader_factory) -> bytes:
        key = (record.id, i)
        payload = self.cache.get(key)
        if payload is not None:
            return payload
        reader = reader_factory()
        frame = reader.read_frame(i)
        payload = encode_frame(frame)
        self.cache.put(key, payload)
        return payload

    def get_frame(self, record_id: str, i: int, atom_subset: list[int] | None = None,
                  stride: int = 1) -> bytes:
        """Encoded frame payload; `i` counts in strides when stride > 1."""
        record = self.registry.get(record_id)
        if stride < 1:
            raise SelectionError("stride must be >= 1")
        frame_no = i * stride
        if not 0 <= frame_no < record.meta.n_frames:
            raise OutOfRangeError(
                f"frame {frame_no} out of range [0, {record.meta.n_frames})"
            )
        if atom_subset is not None:
            atom_subset = self._validate_subset(atom_subset, record.meta.n_atoms)

        reader = None

        def factory():
            nonlocal reader
            reader = self.registry.open_reader(record_id)
            return reader

        try:
            payload = self._frame_payload_cached(record, frame_no, factory)
        finally:
            if reader is not None:
                reader.close()
        if atom_subset is None:
            return payload
        return self._slice_payload(payload, atom_subset)

    @staticmethod
    def _validate_subset(atom_subset, n_atoms: int) -> list[int]:
        subset = [int(a) for a in atom_subset]
        if not subset:
            raise SelectionError("atom subset must not be empty")
        if any(b <= a for a, b in zip(subset, subset[1:])):
            raise SelectionError("atom subset must be strictly ascending")
        if subset[0] < 0 or subset[-1] >= n_atoms:
            raise SelectionError(
                f"atom subset out of range for {n_atoms} atoms"
            )
        return subset

    @staticmethod
    def _slice_payload(payload: bytes, atom_subset: list[int]) -> bytes:
        import struct

        head = payload[: WIRE_HEADER.size]
        time_box = head[:-4]
        coords = np.frombuffer(payload, dtype="<f4", offset=WIRE_HEADER.size).reshape(-1, 3)
        picked = coords[atom_subset]
        return time_box + struct.pack("<i", len(atom_subset)) + picked.tobytes()

    # -- metadata ------------------------------------------------------------

    def get_meta(self, record_id: str) -> dict:
        return self.registry.get(record_id).meta_json()

    def list_trajectories(self) -> list[dict]:
        return [r.meta_json() for r in self.registry.list_records()]

    # -- traces ----------------------------------------------------------------

    def compute_trace(
        self,
        record_id: str,
        spec_obj: dict,
        order: str | None = None,
        value_range: tuple[float, float] | None = None,
    ) -> tuple[dict, bool]:
        """TimeTrace JSON for a measurement spec; returns (body, cache_hit).

        The frame-ordered trace is cached per (trajectory, spec); optional
        ordering and inclusive value filtering are applied on the way out.
        """
        record = self.registry.get(record_id)
        spec = MeasurementSpec.from_json(spec_obj)
        spec.validate_for(record.meta.n_atoms, record.meta.n_frames)
        key = (record_id, json.dumps(spec.to_json(), sort_keys=True))
        with self._trace_lock:
            cached = self._trace_cache.get(key)
            if cached is not None:
                self._trace_cache.move_to_end(key)
        hit = cached is not None
        if cached is None:
            reader = _CachedFrameReader(self, record)
            try:
                trace = analysis.time_trace(reader, None, spec)
            finally:
                reader.close()
            cached = trace.to_json()
            with self._trace_lock:
                self._trace_cache[key] = cached
                while len(self._trace_cache) > _TRACE_CACHE_ENTRIES:
                    self._trace_cache.popitem(last=False)
        if order is None and value_range is None:
            return cached, hit
        trace = analysis.TimeTrace(
            spec=spec,
            frame_numbers=tuple(cached["frames"]),
            values=tuple(cached["values"]),
        )
        if value_range is not None:
            trace = analysis.filter_trace(trace, value_range[0], value_range[1])
        if order is not None:
            trace = analysis.sort_trace(trace, order)
        return trace.to_json(), hit

    # -- sessions ---------------------------------------------------------------

    def save_session(self, name: str, description: str, source: str, state: str,
                     trajectories: list[str]) -> SessionMeta:
        return self.sessions.save(name, description, source, state, trajectories)

    def get_session(self, session_id: str) -> dict:
        meta, state = self.sessions.get(session_id)
        return meta.to_json() | {"state": state}

    def list_sessions(self) -> list[dict]:
        return [m.to_json() for m in self.sessions.list_metas()]
