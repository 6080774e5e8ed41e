"""XTC trajectory reading: header walk, frame index, and full frame decode.

An XTC frame is XDR big-endian throughout: int32 magic (1995), int32
natoms, int32 step, float32 time (ps), nine float32 box vectors (nm);
then the coordinate block, which repeats natoms and either stores
3*natoms raw float32 (natoms <= 9) or the compressed stream: float32
precision, int32 minint[3]/maxint[3], int32 smallidx, int32 nbytes and
nbytes opaque bytes padded to a 4-byte boundary.

Scanning walks headers only (no decompression), so indexing is I/O bound.
Lengths are nm / ps on disk and converted to Angstrom here.

write_xtc exists to build test fixtures; it is not a production writer.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from mdstream.errors import CorruptFileError, OutOfRangeError
from mdstream.model import Frame
from mdstream.traj import xtc_codec
from mdstream.traj.index import FrameIndex, TrajectoryMeta

XTC_MAGIC = 1995
_HEADER = struct.Struct(">iiif")  # magic, natoms, step, time
_BOX = struct.Struct(">9f")
NM_TO_ANGSTROM = np.float32(10.0)


def _read_exact(fh: BinaryIO, n: int, what: str, offset: int) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise EOFError(f"truncated {what}")
    return data


def _frame_extent(fh: BinaryIO, offset: int) -> tuple[int, int, int, float]:
    """Parse one frame header at `offset`; return (length, natoms, step, time).

    Raises EOFError if the frame is incomplete, CorruptFileError on bad magic.
    """
    fh.seek(offset)
    head = fh.read(_HEADER.size)
    if not head:
        raise EOFError("end of file")
    if len(head) < _HEADER.size:
        raise EOFError("truncated frame header")
    magic, natoms, step, time_ps = _HEADER.unpack(head)
    if magic != XTC_MAGIC:
        raise CorruptFileError(
            f"bad XTC magic {magic} (expected {XTC_MAGIC})", offset=offset
        )
    if natoms <= 0:
        raise CorruptFileError(f"nonpositive atom count {natoms}", offset=offset)
    pos = offset + _HEADER.size + 36  # box
    fh.seek(pos)
    (lsize,) = struct.unpack(">i", _read_exact(fh, 4, "coordinate block", pos))
    if lsize != natoms:
        raise CorruptFileError(
            f"coordinate block atom count {lsize} != header {natoms}", offset=pos
        )
    pos += 4
    if natoms <= 9:
        end = pos + 12 * natoms
    else:
        fh.seek(pos + 32)  # precision + minint[3] + maxint[3] + smallidx
        (nbytes,) = struct.unpack(">i", _read_exact(fh, 4, "frame", pos + 32))
        if nbytes < 0:
            raise CorruptFileError(f"negative payload size {nbytes}", offset=pos + 32)
        end = pos + 36 + (nbytes + 3) // 4 * 4
    fh.seek(0, 2)
    if end > fh.tell():
        raise EOFError("truncated frame body")
    return end - offset, natoms, step, time_ps


def xtc_scan(fh: BinaryIO) -> tuple[TrajectoryMeta, FrameIndex]:
    """Walk all frame headers and build the random-access index."""
    fh.seek(0, 2)
    file_size = fh.tell()
    offsets: list[int] = []
    lengths: list[int] = []
    n_atoms = None
    times: list[float] = []
    truncated = False
    pos = 0
    while pos < file_size:
        try:
            length, natoms, _step, time_ps = _frame_extent(fh, pos)
        except EOFError:
            truncated = True
            break
        if n_atoms is None:
            n_atoms = natoms
        elif natoms != n_atoms:
            raise CorruptFileError(
                f"atom count changes from {n_atoms} to {natoms}", offset=pos
            )
        offsets.append(pos)
        lengths.append(length)
        if len(times) < 2:
            times.append(time_ps)
        pos += length
    if n_atoms is None or not offsets:
        raise CorruptFileError("no complete XTC frame found", offset=0)
    timestep = times[1] - times[0] if len(times) == 2 else None
    meta = TrajectoryMeta(
        n_atoms=n_atoms,
        n_frames=len(offsets),
        format="XTC",
        timestep_ps=timestep,
        file_size=file_size,
    )
    return meta, FrameIndex(tuple(offsets), tuple(lengths), truncated=truncated)


def xtc_read_frame(fh: BinaryIO, index: FrameIndex, i: int) -> Frame:
    """Decode frame i via the index. Coordinates come back in Angstrom."""
    if not 0 <= i < index.n_frames:
        raise OutOfRangeError(f"frame {i} out of range [0, {index.n_frames})")
    offset = index.offsets[i]
    fh.seek(offset)
    raw = fh.read(index.lengths[i])
    if len(raw) < index.lengths[i]:
        raise CorruptFileError("frame shorter than indexed length", offset=offset)
    magic, natoms, step, time_ps = _HEADER.unpack_from(raw, 0)
    if magic != XTC_MAGIC:
        raise CorruptFileError(f"bad XTC magic {magic}", offset=offset)
    box_nm = np.array(_BOX.unpack_from(raw, 16), dtype=np.float32).reshape(3, 3)
    (lsize,) = struct.unpack_from(">i", raw, 52)
    if lsize != natoms:
        raise CorruptFileError("coordinate block atom count mismatch", offset=offset)
    if natoms <= 9:
        coords_nm = (
            np.frombuffer(raw, dtype=">f4", count=3 * natoms, offset=56)
            .reshape(natoms, 3)
            .astype(np.float32)
        )
    else:
        (precision,) = struct.unpack_from(">f", raw, 56)
        minint = np.array(struct.unpack_from(">3i", raw, 60), dtype=np.int64)
        maxint = np.array(struct.unpack_from(">3i", raw, 72), dtype=np.int64)
        (smallidx,) = struct.unpack_from(">i", raw, 84)
        (nbytes,) = struct.unpack_from(">i", raw, 88)
        if 92 + nbytes > len(raw):
            raise CorruptFileError(
                f"compressed payload of {nbytes} bytes exceeds frame", offset=offset
            )
        ints = xtc_codec.unpack_ints(raw[92 : 92 + nbytes], natoms, minint, maxint, smallidx)
        coords_nm = xtc_codec.dequantize(ints, precision)
    return Frame(
        frame_number=i,
        time_ps=float(time_ps),
        box=box_nm * NM_TO_ANGSTROM,
        coords=coords_nm * NM_TO_ANGSTROM,
    )


def write_xtc(
    fh: BinaryIO,
    frames_nm,
    times_ps=None,
    box_nm=None,
    precision: float = 1000.0,
    steps=None,
) -> None:
    """Write frames (nm coordinates) as a valid XTC stream. Test support."""
    for k, coords in enumerate(frames_nm):
        coords = np.ascontiguousarray(coords, dtype=np.float32)
        natoms = coords.shape[0]
        time_ps = float(times_ps[k]) if times_ps is not None else float(k)
        step = int(steps[k]) if steps is not None else k
        box = (
            np.ascontiguousarray(box_nm, dtype=np.float32)
            if box_nm is not None
            else np.zeros((3, 3), dtype=np.float32)
        )
        fh.write(_HEADER.pack(XTC_MAGIC, natoms, step, time_ps))
        fh.write(_BOX.pack(*box.reshape(9).tolist()))
        fh.write(struct.pack(">i", natoms))
        if natoms <= 9:
            fh.write(coords.reshape(-1).astype(">f4").tobytes())
        else:
            ints = xtc_codec.quantize(coords, precision)
            payload, minint, maxint, smallidx = xtc_codec.pack_ints(ints)
            fh.write(struct.pack(">f", precision))
            fh.write(struct.pack(">3i", *minint.tolist()))
            fh.write(struct.pack(">3i", *maxint.tolist()))
            fh.write(struct.pack(">i", smallidx))
            fh.write(struct.pack(">i", len(payload)))
            fh.write(payload)
            if len(payload) % 4:
                fh.write(b"\x00" * (4 - len(payload) % 4))
