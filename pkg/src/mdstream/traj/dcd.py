"""CHARMM/NAMD DCD trajectory reading.

DCD files are sequences of Fortran-style records: int32 byte count, body,
same int32 byte count again. Layout: a header record tagged "CORD" with 20
control ints (icntrl[0] frame count, icntrl[2] save interval, icntrl[9]
timestep as a float stored in the int slot, icntrl[10] unit-cell flag), a
title record, an atom-count record, then per frame an optional unit-cell
record (six float64: A, gamma, B, beta, alpha, C) followed by one record
of natoms float32 per axis (X, Y, Z), already in Angstrom.

Both endiannesses occur in the wild; the first record marker (must be 84)
decides. Unit-cell angles are accepted either as degrees or as cosines
(writers disagree); the timestep is taken at face value in ps.

write_dcd exists to build test fixtures; it is not a production writer.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from mdstream.errors import CorruptFileError, OutOfRangeError, UnsupportedFormatError
from mdstream.model import Frame
from mdstream.traj.index import FrameIndex, TrajectoryMeta

_HEADER_BODY = 84  # 4-byte tag + 20 int32


class _RecordReader:
    def __init__(self, fh: BinaryIO, endian: str):
        self.fh = fh
        self.endian = endian

    def read(self, expect_len: int | None = None) -> bytes:
        offset = self.fh.tell()
        head = self.fh.read(4)
        if len(head) < 4:
            raise EOFError("end of file")
        (n,) = struct.unpack(self.endian + "i", head)
        if n < 0:
            raise CorruptFileError(f"negative record length {n}", offset=offset)
        if expect_len is not None and n != expect_len:
            raise CorruptFileError(
                f"record length {n}, expected {expect_len}", offset=offset
            )
        body = self.fh.read(n)
        tail = self.fh.read(4)
        if len(body) < n or len(tail) < 4:
            raise EOFError("truncated record")
        (n2,) = struct.unpack(self.endian + "i", tail)
        if n2 != n:
            raise CorruptFileError(
                f"record suffix {n2} != prefix {n}", offset=offset
            )
        return body

    def skip(self) -> int:
        """Skip one record, returning its body length."""
        offset = self.fh.tell()
        head = self.fh.read(4)
        if len(head) < 4:
            raise EOFError("end of file")
        (n,) = struct.unpack(self.endian + "i", head)
        if n < 0:
            raise CorruptFileError(f"negative record length {n}", offset=offset)
        self.fh.seek(n, 1)
        tail = self.fh.read(4)
        if len(tail) < 4:
            raise EOFError("truncated record")
        (n2,) = struct.unpack(self.endian + "i", tail)
        if n2 != n:
            raise CorruptFileError(f"record suffix {n2} != prefix {n}", offset=offset)
        return n


def _detect_endian(fh: BinaryIO) -> str:
    fh.seek(0)
    first = fh.read(4)
    if len(first) < 4:
        raise UnsupportedFormatError("file too short for a DCD header")
    for endian in ("<", ">"):
        (marker,) = struct.unpack(endian + "i", first)
        if marker == _HEADER_BODY:
            return endian
    raise UnsupportedFormatError(
        "first record marker is not 84 in either byte order; not a DCD file"
    )


class DcdLayout:
    """Everything needed to locate and decode frames without rescanning."""

    def __init__(self, endian: str, n_atoms: int, has_cell: bool,
                 first_frame_offset: int, timestep_ps: float | None):
        self.endian = endian
        self.n_atoms = n_atoms
        self.has_cell = has_cell
        self.first_frame_offset = first_frame_offset
        self.timestep_ps = timestep_ps

    @property
    def frame_length(self) -> int:
        cell = (8 + 48) if self.has_cell else 0
        return cell + 3 * (8 + 4 * self.n_atoms)


def _parse_header(fh: BinaryIO) -> DcdLayout:
    endian = _detect_endian(fh)
    fh.seek(0)
    rd = _RecordReader(fh, endian)
    body = rd.read(expect_len=_HEADER_BODY)
    tag = body[:4]
    if tag != b"CORD":
        raise UnsupportedFormatError(
            f"DCD tag {tag!r} not supported (only coordinate files, tag CORD)"
        )
    icntrl = struct.unpack(endian + "20i", body[4:])
    n_frames_declared = icntrl[0]
    nsavc = icntrl[2]
    has_cell = icntrl[10] != 0
    # CHARMM keeps the timestep as a float bit-pattern inside the int slot.
    (delta,) = struct.unpack(endian + "f", struct.pack(endian + "i", icntrl[9]))
    timestep = None
    if np.isfinite(delta) and delta > 0:
        timestep = float(delta) * max(nsavc, 1)
    rd.read()  # title block, ignored
    natoms_body = rd.read(expect_len=4)
    (n_atoms,) = struct.unpack(endian + "i", natoms_body)
    if n_atoms <= 0:
        raise CorruptFileError(f"DCD reports {n_atoms} atoms")
    del n_frames_declared  # actual count comes from walking the file
    return DcdLayout(endian, n_atoms, has_cell, fh.tell(), timestep)


def dcd_scan(fh: BinaryIO) -> tuple[TrajectoryMeta, FrameIndex]:
    """Validate record structure frame by frame and build the index."""
    layout = _parse_header(fh)
    fh.seek(0, 2)
    file_size = fh.tell()
    rd = _RecordReader(fh, layout.endian)
    offsets: list[int] = []
    lengths: list[int] = []
    truncated = False
    pos = layout.first_frame_offset
    while pos < file_size:
        fh.seek(pos)
        try:
            if layout.has_cell:
                got = rd.skip()
                if got != 48:
                    raise CorruptFileError(
                        f"unit-cell record of {got} bytes, expected 48", offset=pos
                    )
            for _axis in range(3):
                got = rd.skip()
                if got != 4 * layout.n_atoms:
                    raise CorruptFileError(
                        f"coordinate record of {got} bytes for {layout.n_atoms} atoms",
                        offset=pos,
                    )
        except EOFError:
            truncated = True
            break
        end = fh.tell()
        offsets.append(pos)
        lengths.append(end - pos)
        pos = end
    if not offsets:
        raise CorruptFileError("no complete DCD frame found", offset=layout.first_frame_offset)
    meta = TrajectoryMeta(
        n_atoms=layout.n_atoms,
        n_frames=len(offsets),
        format="DCD",
        timestep_ps=layout.timestep_ps,
        file_size=file_size,
    )
    return meta, FrameIndex(tuple(offsets), tuple(lengths), truncated=truncated)


def _box_from_unitcell(cell: np.ndarray) -> np.ndarray:
    """Unit-cell record (A, gamma, B, beta, alpha, C) to 3x3 row-vector box."""
    a, gamma, b, beta, alpha, c = (float(v) for v in cell)
    angles = []
    for value in (alpha, beta, gamma):
        # some writers store cos(angle) instead of degrees
        if -1.0 <= value <= 1.0:
            angles.append(np.degrees(np.arccos(value)))
        else:
            angles.append(value)
    alpha, beta, gamma = (np.radians(v) for v in angles)
    bx = b * np.cos(gamma)
    by = b * np.sin(gamma)
    cx = c * np.cos(beta)
    cy = c * (np.cos(alpha) - np.cos(beta) * np.cos(gamma)) / max(np.sin(gamma), 1e-12)
    cz_sq = c * c - cx * cx - cy * cy
    cz = np.sqrt(max(cz_sq, 0.0))
    box = np.array([[a, 0.0, 0.0], [bx, by, 0.0], [cx, cy, cz]], dtype=np.float64)
    box[np.abs(box) < 1e-9] = 0.0
    return box.astype(np.float32)


def dcd_read_frame(fh: BinaryIO, layout: DcdLayout, index: FrameIndex, i: int) -> Frame:
    if not 0 <= i < index.n_frames:
        raise OutOfRangeError(f"frame {i} out of range [0, {index.n_frames})")
    fh.seek(index.offsets[i])
    rd = _RecordReader(fh, layout.endian)
    if layout.has_cell:
        cell = np.frombuffer(rd.read(expect_len=48), dtype=layout.endian + "f8")
        box = _box_from_unitcell(cell)
    else:
        box = np.zeros((3, 3), dtype=np.float32)
    axes = []
    for _ in range(3):
        body = rd.read(expect_len=4 * layout.n_atoms)
        axes.append(np.frombuffer(body, dtype=layout.endian + "f4"))
    coords = np.stack(axes, axis=1).astype(np.float32)
    if layout.timestep_ps is not None:
        time_ps = i * layout.timestep_ps
    else:
        time_ps = float(i)
    return Frame(frame_number=i, time_ps=time_ps, box=box, coords=coords)


def write_dcd(
    fh: BinaryIO,
    frames,
    endian: str = "<",
    unitcell=None,
    timestep_ps: float | None = None,
    tag: bytes = b"CORD",
) -> None:
    """Write frames (Angstrom coordinates) as a DCD stream. Test support."""
    frames = [np.ascontiguousarray(f, dtype=np.float32) for f in frames]
    n_atoms = frames[0].shape[0]

    def record(body: bytes) -> None:
        fh.write(struct.pack(endian + "i", len(body)))
        fh.write(body)
        fh.write(struct.pack(endian + "i", len(body)))

    icntrl = [0] * 20
    icntrl[0] = len(frames)
    icntrl[1] = 0
    icntrl[2] = 1
    if timestep_ps is not None:
        (icntrl[9],) = struct.unpack(endian + "i", struct.pack(endian + "f", timestep_ps))
    icntrl[10] = 1 if unitcell is not None else 0
    icntrl[19] = 24  # pretend CHARMM version
    record(tag + struct.pack(endian + "20i", *icntrl))
    title = b"*  test fixture".ljust(80)
    record(struct.pack(endian + "i", 1) + title)
    record(struct.pack(endian + "i", n_atoms))
    for coords in frames:
        if unitcell is not None:
            record(np.asarray(unitcell, dtype=endian + "f8").tobytes())
        for axis in range(3):
            record(coords[:, axis].astype(endian + "f4").tobytes())
