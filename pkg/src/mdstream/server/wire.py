"""Binary frame payload for the streaming endpoint (wire version 1).

Little-endian layout: float32 time_ps; nine float32 box values (Angstrom,
row-major); int32 coordinate count; then 3*n float32 coordinates
(Angstrom). Trajectory files are big-endian XDR, so the one-time
conversion happens here on the server rather than in every client.
"""

from __future__ import annotations

import struct

import numpy as np

from mdstream.model import Frame

WIRE_VERSION = "1"
WIRE_HEADER = struct.Struct("<f9fi")


def encode_frame(frame: Frame, atom_subset: list[int] | None = None) -> bytes:
    coords = frame.coords
    if atom_subset is not None:
        coords = coords[np.asarray(atom_subset, dtype=np.int64)]
    n = coords.shape[0]
    head = WIRE_HEADER.pack(
        np.float32(frame.time_ps), *frame.box.astype("<f4").reshape(9).tolist(), n
    )
    return head + np.ascontiguousarray(coords, dtype="<f4").tobytes()


def decode_frame_payload(payload: bytes) -> tuple[float, np.ndarray, np.ndarray]:
    """Inverse of encode_frame; used by tests and the CLI."""
    fields = WIRE_HEADER.unpack_from(payload, 0)
    time_ps = fields[0]
    box = np.array(fields[1:10], dtype=np.float32).reshape(3, 3)
    n = fields[10]
    coords = np.frombuffer(
        payload, dtype="<f4", count=3 * n, offset=WIRE_HEADER.size
    ).reshape(n, 3)
    return time_ps, box, coords
