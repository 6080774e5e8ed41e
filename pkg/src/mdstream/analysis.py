"""Geometry engine: per-frame measurements, optimal superposition, and
navigable time-traces.

Distances are Angstrom, angles and torsions degrees. Measurements apply no
periodic-image correction: the box is carried along for future use, but
values are computed on raw coordinates (documented limitation; intra-protein
events are what the traces are for).

All functions are pure and operate on immutable inputs, so traces for
different frames may be computed concurrently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from mdstream.errors import (
    DegenerateGeometryError,
    InsufficientPointsError,
    InvalidRangeError,
    OutOfRangeError,
    SelectionError,
    TrajectoryMatchError,
)
from mdstream.model import Selection

_DEGENERATE_EPS = 1e-12


class TraceOrder(str, enum.Enum):
    BY_FRAME = "by_frame"
    ASCENDING = "ascending"
    DESCENDING = "descending"


@dataclass(frozen=True)
class MeasurementSpec:
    """What to measure: kind plus the atom indices it applies to.

    kind: "distance" (2 atoms), "angle" (3), "dihedral" (4), or "rmsd"
    (any selection; reference_frame and superpose apply to rmsd only).
    """

    kind: str
    atoms: tuple[int, ...]
    reference_frame: int = 0
    superpose: bool = True

    _ARITY = {"distance": 2, "angle": 3, "dihedral": 4}

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(int(a) for a in self.atoms))
        if self.kind not in ("distance", "angle", "dihedral", "rmsd"):
            raise SelectionError(f"unknown measurement kind {self.kind!r}")
        want = self._ARITY.get(self.kind)
        if want is not None and len(self.atoms) != want:
            raise SelectionError(
                f"{self.kind} needs exactly {want} atoms, got {len(self.atoms)}"
            )
        if len(set(self.atoms)) != len(self.atoms):
            raise SelectionError(f"{self.kind} atoms must be distinct")
        if self.kind == "rmsd" and len(self.atoms) == 0:
            raise SelectionError("rmsd needs a non-empty selection")
        if any(a < 0 for a in self.atoms):
            raise SelectionError("negative atom index")
        if self.reference_frame < 0:
            raise SelectionError("reference_frame must be >= 0")

    @property
    def unit(self) -> str:
        return "degrees" if self.kind in ("angle", "dihedral") else "angstrom"

    def validate_for(self, n_atoms: int, n_frames: int | None = None) -> None:
        if self.atoms and max(self.atoms) >= n_atoms:
            raise SelectionError(
                f"atom index {max(self.atoms)} out of range for {n_atoms} atoms"
            )
        if self.kind == "rmsd" and n_frames is not None:
            if self.reference_frame >= n_frames:
                raise OutOfRangeError(
                    f"reference frame {self.reference_frame} out of range "
                    f"[0, {n_frames})"
                )

    def to_json(self) -> dict:
        spec: dict = {"kind": self.kind, "atoms": list(self.atoms)}
        if self.kind == "rmsd":
            spec["reference_frame"] = self.reference_frame
            spec["superpose"] = self.superpose
        return spec

    @classmethod
    def from_json(cls, obj: dict) -> "MeasurementSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise SelectionError("measurement spec must be an object with a kind")
        atoms = obj.get("atoms", [])
        if not isinstance(atoms, (list, tuple)):
            raise SelectionError("atoms must be a list of indices")
        return cls(
            kind=obj["kind"],
            atoms=tuple(atoms),
            reference_frame=int(obj.get("reference_frame", 0)),
            superpose=bool(obj.get("superpose", True)),
        )


def _points(coords: np.ndarray, indices) -> np.ndarray:
    coords = np.asarray(coords)
    n = coords.shape[0]
    for idx in indices:
        if not 0 <= idx < n:
            raise OutOfRangeError(f"atom index {idx} out of range for {n} atoms")
    return coords[list(indices)].astype(np.float64)


def distance(coords: np.ndarray, i: int, j: int) -> float:
    """Euclidean distance between atoms i and j, Angstrom."""
    if i == j:
        raise SelectionError("distance needs two distinct atoms")
    p, q = _points(coords, (i, j))
    return float(np.linalg.norm(p - q))


def angle(coords: np.ndarray, i: int, j: int, k: int) -> float:
    """Angle at vertex j in degrees, range [0, 180]."""
    if len({i, j, k}) != 3:
        raise SelectionError("angle needs three distinct atoms")
    pi, pj, pk = _points(coords, (i, j, k))
    u = pi - pj
    v = pk - pj
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < _DEGENERATE_EPS or nv < _DEGENERATE_EPS:
        raise DegenerateGeometryError("angle arm has zero length")
    cosang = np.dot(u, v) / (nu * nv)
    return float(math.degrees(math.acos(min(1.0, max(-1.0, cosang)))))


def dihedral(coords: np.ndarray, i: int, j: int, k: int, l: int) -> float:
    """Signed torsion angle i-j-k-l in degrees, range (-180, 180].

    Positive for clockwise rotation of the far bond looking down j->k
    (the usual biomolecular sign convention).
    """
    if len({i, j, k, l}) != 4:
        raise SelectionError("dihedral needs four distinct atoms")
    pi, pj, pk, pl = _points(coords, (i, j, k, l))
    b1 = pj - pi
    b2 = pk - pj
    b3 = pl - pk
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    if np.dot(n1, n1) < _DEGENERATE_EPS or np.dot(n2, n2) < _DEGENERATE_EPS:
        raise DegenerateGeometryError("dihedral axis collinear with an end atom")
    y = np.dot(np.linalg.norm(b2) * b1, n2)
    x = np.dot(n1, n2)
    deg = math.degrees(math.atan2(y, x))
    # atan2 yields (-180, 180]; map -180 exactly to +180 for a closed top end
    if deg <= -180.0:
        deg += 360.0
    return float(deg)


def kabsch(moving: np.ndarray, target: np.ndarray):
    """Optimal proper rotation + translation taking `moving` onto `target`.

    Returns (rotation, translation, rmsd) with rotation @ p + translation
    minimizing the RMSD against target. Reflections are corrected by
    flipping the smallest singular direction, so det(rotation) is +1.
    """
    P = np.asarray(moving, dtype=np.float64)
    Q = np.asarray(target, dtype=np.float64)
    if P.shape != Q.shape or P.ndim != 2 or P.shape[1] != 3:
        raise InsufficientPointsError("point sets must both be (N, 3)")
    n = P.shape[0]
    if n < 3:
        raise InsufficientPointsError(f"superposition needs >= 3 points, got {n}")
    pc = P.mean(axis=0)
    qc = Q.mean(axis=0)
    H = (P - pc).T @ (Q - qc)
    U, S, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    if d == 0:
        d = 1.0
    D = np.diag([1.0, 1.0, d])
    R = Vt.T @ D @ U.T
    t = qc - R @ pc
    moved = (R @ P.T).T + t
    value = float(np.sqrt(np.mean(np.sum((moved - Q) ** 2, axis=1))))
    return R, t, value


def rmsd(
    coords_a: np.ndarray,
    coords_b: np.ndarray,
    selection: Selection | None = None,
    superpose: bool = True,
) -> float:
    """RMSD of selected atoms between two coordinate sets, Angstrom.

    With superpose=True the selection is optimally superposed first.
    """
    A = np.asarray(coords_a, dtype=np.float64)
    B = np.asarray(coords_b, dtype=np.float64)
    if A.shape != B.shape:
        raise TrajectoryMatchError(
            f"coordinate sets differ in shape: {A.shape} vs {B.shape}"
        )
    if selection is None:
        selection = Selection.all_atoms(A.shape[0])
    if len(selection) == 0:
        raise SelectionError("rmsd over an empty selection")
    selection.validate_for(A.shape[0])
    sel = selection.as_array()
    P = A[sel]
    Q = B[sel]
    if np.array_equal(P, Q):
        return 0.0
    if superpose:
        return kabsch(P, Q)[2]
    return float(np.sqrt(np.mean(np.sum((P - Q) ** 2, axis=1))))


def measure(spec: MeasurementSpec, coords: np.ndarray, reference: np.ndarray | None = None) -> float:
    """Evaluate one measurement on one frame's coordinates."""
    if spec.kind == "distance":
        return distance(coords, *spec.atoms)
    if spec.kind == "angle":
        return angle(coords, *spec.atoms)
    if spec.kind == "dihedral":
        return dihedral(coords, *spec.atoms)
    if reference is None:
        raise SelectionError("rmsd needs reference coordinates")
    return rmsd(coords, reference, Selection.of(spec.atoms), spec.superpose)


@dataclass(frozen=True)
class TimeTrace:
    spec: MeasurementSpec
    frame_numbers: tuple[int, ...]
    values: tuple[float, ...]
    order: TraceOrder = TraceOrder.BY_FRAME

    def __post_init__(self):
        if len(self.frame_numbers) != len(self.values):
            raise ValueError("frame_numbers and values must be parallel")

    def __len__(self) -> int:
        return len(self.values)

    def to_json(self) -> dict:
        return {
            "kind": self.spec.kind,
            "atoms": list(self.spec.atoms),
            "unit": self.spec.unit,
            "frames": list(self.frame_numbers),
            "values": list(self.values),
        }


def time_trace(reader, structure, spec: MeasurementSpec) -> TimeTrace:
    """Evaluate spec on every frame of a trajectory, frame order.

    `reader` is a TrajectoryReader (anything with .meta and .read_frame);
    `structure` may be None to skip the match check (CLI convenience).
    """
    n_atoms = reader.meta.n_atoms
    n_frames = reader.meta.n_frames
    if structure is not None and structure.n_atoms != n_atoms:
        raise TrajectoryMatchError(
            f"structure has {structure.n_atoms} atoms but trajectory has "
            f"{n_atoms}; cannot match"
        )
    spec.validate_for(n_atoms, n_frames)
    reference = None
    if spec.kind == "rmsd":
        reference = reader.read_frame(spec.reference_frame).coords
    values = []
    for i in range(n_frames):
        frame = reader.read_frame(i)
        values.append(measure(spec, frame.coords, reference))
    return TimeTrace(
        spec=spec,
        frame_numbers=tuple(range(n_frames)),
        values=tuple(values),
        order=TraceOrder.BY_FRAME,
    )


def sort_trace(trace: TimeTrace, order: TraceOrder | str) -> TimeTrace:
    """Reorder (frame, value) pairs; stable within equal values."""
    order = TraceOrder(order)
    pairs = list(zip(trace.frame_numbers, trace.values))
    if order is TraceOrder.BY_FRAME:
        pairs.sort(key=lambda p: p[0])
    elif order is TraceOrder.ASCENDING:
        pairs.sort(key=lambda p: p[1])
    else:
        pairs.sort(key=lambda p: -p[1])
    return replace(
        trace,
        frame_numbers=tuple(p[0] for p in pairs),
        values=tuple(p[1] for p in pairs),
        order=order,
    )


def filter_trace(trace: TimeTrace, vmin: float, vmax: float) -> TimeTrace:
    """Keep pairs with vmin <= value <= vmax (inclusive both ends)."""
    if vmin > vmax:
        raise InvalidRangeError(f"filter range [{vmin}, {vmax}] has min > max")
    kept = [
        (f, v)
        for f, v in zip(trace.frame_numbers, trace.values)
        if vmin <= v <= vmax
    ]
    return replace(
        trace,
        frame_numbers=tuple(f for f, _ in kept),
        values=tuple(v for _, v in kept),
    )
