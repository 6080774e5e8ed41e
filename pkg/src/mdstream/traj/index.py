"""Frame offset tables and the "MDIX" index sidecar format.

The sidecar lets a multi-gigabyte trajectory be served frame-by-frame
without ever re-scanning it: magic "MDIX", u32 version, u64 frame count,
then (u64 offset, u64 length) per frame, all little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

from mdstream.errors import CorruptFileError

MDIX_MAGIC = b"MDIX"
MDIX_VERSION = 1


@dataclass(frozen=True)
class TrajectoryMeta:
    n_atoms: int
    n_frames: int
    format: str  # "XTC" or "DCD"
    timestep_ps: float | None
    file_size: int

    def __post_init__(self):
        if self.n_frames < 1:
            raise CorruptFileError("trajectory holds no complete frame")
        if self.n_atoms < 1:
            raise CorruptFileError("trajectory reports zero atoms")


@dataclass(frozen=True)
class FrameIndex:
    offsets: tuple[int, ...]
    lengths: tuple[int, ...]
    truncated: bool = False  # scan found a partial trailing frame

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(int(o) for o in self.offsets))
        object.__setattr__(self, "lengths", tuple(int(n) for n in self.lengths))
        if len(self.offsets) != len(self.lengths):
            raise ValueError("offsets and lengths must be parallel")
        for i in range(len(self.offsets) - 1):
            if self.offsets[i] + self.lengths[i] > self.offsets[i + 1]:
                raise ValueError(f"frame {i} overlaps frame {i + 1}")
            if self.offsets[i] >= self.offsets[i + 1]:
                raise ValueError("offsets must be strictly ascending")

    @property
    def n_frames(self) -> int:
        return len(self.offsets)

    def end_of_data(self) -> int:
        return self.offsets[-1] + self.lengths[-1] if self.offsets else 0

    def validate_against_size(self, file_size: int) -> None:
        if self.end_of_data() > file_size:
            raise CorruptFileError(
                f"index ends at {self.end_of_data()} but file is {file_size} bytes"
            )


def write_mdix(index: FrameIndex, path: str | Path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MDIX_MAGIC)
        fh.write(struct.pack("<I", MDIX_VERSION))
        fh.write(struct.pack("<Q", index.n_frames))
        for off, length in zip(index.offsets, index.lengths):
            fh.write(struct.pack("<QQ", off, length))


def read_mdix(path: str | Path) -> FrameIndex:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 16 or raw[:4] != MDIX_MAGIC:
        raise CorruptFileError(f"{path} is not an MDIX index", offset=0)
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != MDIX_VERSION:
        raise CorruptFileError(f"unsupported MDIX version {version}")
    (n_frames,) = struct.unpack_from("<Q", raw, 8)
    need = 16 + 16 * n_frames
    if len(raw) < need:
        raise CorruptFileError(f"MDIX truncated: {len(raw)} < {need} bytes")
    pairs = struct.unpack_from(f"<{2 * n_frames}Q", raw, 16)
    return FrameIndex(offsets=pairs[0::2], lengths=pairs[1::2])
