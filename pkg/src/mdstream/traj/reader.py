"""Format detection and a uniform random-access reader over XTC and DCD."""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO

from mdstream.errors import UnsupportedFormatError
from mdstream.model import Frame
from mdstream.traj import dcd, xtc
from mdstream.traj.index import FrameIndex, TrajectoryMeta


def detect_format(path: str | Path) -> str:
    """Sniff XTC/DCD by magic bytes, falling back to the file extension."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if len(head) >= 4:
        (be,) = struct.unpack(">i", head[:4])
        (le,) = struct.unpack("<i", head[:4])
        if be == xtc.XTC_MAGIC:
            return "XTC"
        if 84 in (be, le) and head[4:8] == b"CORD":
            return "DCD"
        if 84 in (be, le):
            return "DCD"
    ext = path.suffix.lower()
    if ext == ".xtc":
        return "XTC"
    if ext == ".dcd":
        return "DCD"
    raise UnsupportedFormatError(f"cannot determine trajectory format of {path}")


def scan_trajectory(path: str | Path, format: str | None = None) -> tuple[TrajectoryMeta, FrameIndex]:
    fmt = format or detect_format(path)
    with open(path, "rb") as fh:
        if fmt == "XTC":
            return xtc.xtc_scan(fh)
        if fmt == "DCD":
            return dcd.dcd_scan(fh)
    raise UnsupportedFormatError(f"unknown trajectory format {fmt!r}")


class TrajectoryReader:
    """Random access frames from one trajectory file.

    Holds its own file handle; open one reader per concurrent consumer.
    """

    def __init__(
        self,
        path: str | Path,
        meta: TrajectoryMeta | None = None,
        index: FrameIndex | None = None,
    ):
        self.path = Path(path)
        if meta is None or index is None:
            meta, index = scan_trajectory(self.path)
        self.meta = meta
        self.index = index
        self._fh: BinaryIO = open(self.path, "rb")
        self._dcd_layout = None
        if meta.format == "DCD":
            self._dcd_layout = dcd._parse_header(self._fh)

    def read_frame(self, i: int) -> Frame:
        if self.meta.format == "XTC":
            return xtc.xtc_read_frame(self._fh, self.index, i)
        frame = dcd.dcd_read_frame(self._fh, self._dcd_layout, self.index, i)
        if self.meta.timestep_ps is None:
            return frame
        return frame

    def frames(self):
        for i in range(self.meta.n_frames):
            yield self.read_frame(i)

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TrajectoryReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_trajectory(path: str | Path, meta=None, index=None) -> TrajectoryReader:
    return TrajectoryReader(path, meta=meta, index=index)
