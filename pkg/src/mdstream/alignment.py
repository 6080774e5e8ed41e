"""Sequence-alignment import and alignment-driven superposition.

Workflow: parse a ClustalW file, match each alignment row to the structure
chain carrying that sequence, then superpose every structure onto the first
matched one using the CA atoms of columns shared (non-gap) between the rows.

Matching is exact-first; if no chain sequence equals the row's ungapped
sequence, the best chain of the same length with identity >= the threshold
(default 90%) wins. CA-only fitting is the community default for
sequence-driven superposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mdstream import analysis
from mdstream.errors import (
    AmbiguousMatchError,
    ClustalParseError,
    InsufficientPointsError,
    UnmatchedRowError,
)
from mdstream.model import Structure, chain_sequence

DEFAULT_IDENTITY_THRESHOLD = 0.9
_CONSERVATION_CHARS = set(" .:*")


@dataclass(frozen=True)
class Alignment:
    names: tuple[str, ...]
    rows: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) != len(self.rows):
            raise ClustalParseError("names and rows must be parallel")
        if len(set(self.names)) != len(self.names):
            raise ClustalParseError("duplicate sequence names")
        lengths = {len(r) for r in self.rows}
        if len(lengths) > 1:
            raise ClustalParseError(
                f"rows have unequal lengths {sorted(lengths)}"
            )

    @property
    def length(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def ungapped(self, index: int) -> str:
        return self.rows[index].replace("-", "")


@dataclass(frozen=True)
class RowMatch:
    name: str
    structure_id: str
    chain_id: str
    column_to_residue: dict[int, int]  # alignment column -> residue index


@dataclass(frozen=True)
class AlignmentMatch:
    alignment: Alignment
    pairs: tuple[RowMatch, ...]


def parse_clustal(text: str) -> Alignment:
    """Parse ClustalW interleaved alignment text.

    Requires a first line starting with "CLUSTAL". Conservation lines
    (space/./:/* only) and per-line cumulative counts are ignored;
    segments are concatenated per name in block order.
    """
    lines = text.splitlines()
    while lines and not lines[0].strip():
        lines.pop(0)
    if not lines or not lines[0].lstrip().startswith("CLUSTAL"):
        raise ClustalParseError('not a ClustalW file: header must start with "CLUSTAL"')

    order: list[str] = []
    segments: dict[str, list[str]] = {}
    block_names: list[str] = []
    first_block: list[str] | None = None

    def close_block():
        nonlocal first_block, block_names
        if not block_names:
            return
        if first_block is None:
            first_block = list(block_names)
        elif block_names != first_block:
            raise ClustalParseError(
                f"inconsistent interleave: block lists {block_names}, "
                f"expected {first_block}"
            )
        block_names = []

    for raw in lines[1:]:
        if not raw.strip():
            close_block()
            continue
        if raw[0] in (" ", "\t"):
            # conservation / annotation line, aligned under the sequences
            if set(raw.strip()) <= _CONSERVATION_CHARS | {"."}:
                continue
            raise ClustalParseError(f"unexpected indented line: {raw.strip()[:40]!r}")
        parts = raw.split()
        if len(parts) < 2:
            raise ClustalParseError(f"sequence line without a segment: {raw[:40]!r}")
        name, segment = parts[0], parts[1]
        if len(parts) >= 3 and not parts[2].isdigit():
            raise ClustalParseError(f"trailing token {parts[2]!r} is not a count")
        if not all(c.isalpha() or c == "-" for c in segment):
            raise ClustalParseError(f"invalid sequence characters in {segment[:40]!r}")
        if name in block_names:
            raise ClustalParseError(
                f"name {name!r} appears twice in one block (inconsistent interleave)"
            )
        block_names.append(name)
        if name not in segments:
            order.append(name)
            segments[name] = []
        segments[name].append(segment.upper())
    close_block()

    if not order:
        raise ClustalParseError("alignment contains no sequences")
    rows = tuple("".join(segments[name]) for name in order)
    return Alignment(names=tuple(order), rows=rows)


def _identity(a: str, b: str) -> float:
    if not a or not b:
        return 0.0
    same = sum(1 for x, y in zip(a, b) if x == y)
    return same / max(len(a), len(b))


def match_alignment(
    alignment: Alignment,
    structures: list[Structure],
    identity_threshold: float = DEFAULT_IDENTITY_THRESHOLD,
) -> AlignmentMatch:
    """Assign each alignment row to the (structure, chain) carrying it.

    Exact sequence match wins; otherwise the equal-length chain with the
    highest identity >= identity_threshold. Every chain serves at most one
    row: among equally good candidates a row takes the first unclaimed one
    (several identical structures are the normal superposition input), and
    it is an error when every acceptable chain is already claimed.
    """
    candidates = []  # (structure, chain_id, sequence)
    for s in structures:
        for chain_id in s.chains:
            candidates.append((s, chain_id, chain_sequence(s, chain_id)))

    pairs: list[RowMatch] = []
    claimed: set[tuple[str, str]] = set()
    for row_i, name in enumerate(alignment.names):
        target = alignment.ungapped(row_i)
        scored = []
        for cand in candidates:
            if cand[2] == target:
                scored.append((1.0, cand))
            elif len(cand[2]) == len(target):
                score = _identity(target, cand[2])
                if score >= identity_threshold:
                    scored.append((score, cand))
        if not scored:
            raise UnmatchedRowError(
                f"alignment row {name!r} matches no structure chain at "
                f">= {identity_threshold:.0%} identity"
            )
        scored.sort(key=lambda sc: -sc[0])
        best = None
        for _score, cand in scored:
            if (cand[0].id, cand[1]) not in claimed:
                best = cand
                break
        if best is None:
            top = scored[0][1]
            raise AmbiguousMatchError(
                f"row {name!r}: every matching chain (e.g. {top[1]!r} of "
                f"structure {top[0].id!r}) is already claimed by an earlier row"
            )
        claimed.add((best[0].id, best[1]))

        res_offset = next(
            i for i, r in enumerate(best[0].residues) if r.chain_id == best[1]
        )
        col_map: dict[int, int] = {}
        seq_pos = 0
        for col, letter in enumerate(alignment.rows[row_i]):
            if letter == "-":
                continue
            col_map[col] = res_offset + seq_pos
            seq_pos += 1
        pairs.append(RowMatch(name, best[0].id, best[1], col_map))
    return AlignmentMatch(alignment=alignment, pairs=pairs)


def _ca_coords_for_columns(
    structure: Structure, row: RowMatch, columns
) -> tuple[list[int], np.ndarray]:
    """CA coordinates for mapped residues; columns lacking a CA are skipped."""
    usable = []
    coords = []
    for col in columns:
        res_index = row.column_to_residue[col]
        res = structure.residues[res_index]
        ca = None
        for a in range(res.atom_start, res.atom_stop):
            if structure.atoms[a].name == "CA":
                ca = a
                break
        if ca is None:
            continue
        usable.append(col)
        coords.append(structure.reference_coords[ca])
    return usable, np.asarray(coords, dtype=np.float64)


@dataclass(frozen=True)
class SuperpositionResult:
    structure_id: str
    rotation: np.ndarray  # 3x3
    translation: np.ndarray  # 3
    rmsd: float
    n_fit_atoms: int


def superpose_by_alignment(
    match: AlignmentMatch, structures: list[Structure]
) -> list[SuperpositionResult]:
    """Superpose every matched structure onto the first matched one.

    The fit uses CA atoms at columns non-gapped in both rows; a mapped
    residue without a CA drops its column. Fewer than 3 usable columns is
    an error. The reference structure comes back first with the identity
    transform.
    """
    if len(match.pairs) < 2:
        raise InsufficientPointsError("superposition needs at least two matched rows")
    by_id = {s.id: s for s in structures}
    ref_row = match.pairs[0]
    ref_struct = by_id[ref_row.structure_id]

    results = [
        SuperpositionResult(
            structure_id=ref_struct.id,
            rotation=np.eye(3),
            translation=np.zeros(3),
            rmsd=0.0,
            n_fit_atoms=len(ref_row.column_to_residue),
        )
    ]
    for row in match.pairs[1:]:
        mobile_struct = by_id[row.structure_id]
        shared = sorted(set(ref_row.column_to_residue) & set(row.column_to_residue))
        if len(shared) < 3:
            raise InsufficientPointsError(
                f"only {len(shared)} shared non-gap columns between "
                f"{ref_row.name!r} and {row.name!r}; need >= 3"
            )
        cols_ref, P_ref = _ca_coords_for_columns(ref_struct, ref_row, shared)
        cols_mob, P_mob = _ca_coords_for_columns(mobile_struct, row, shared)
        usable = sorted(set(cols_ref) & set(cols_mob))
        if len(usable) < 3:
            raise InsufficientPointsError(
                f"only {len(usable)} shared columns have CA atoms in both "
                f"structures; need >= 3"
            )
        ref_sel = [cols_ref.index(c) for c in usable]
        mob_sel = [cols_mob.index(c) for c in usable]
        R, t, fit_rmsd = analysis.kabsch(P_mob[mob_sel], P_ref[ref_sel])
        results.append(
            SuperpositionResult(
                structure_id=mobile_struct.id,
                rotation=R,
                translation=t,
                rmsd=fit_rmsd,
                n_fit_atoms=len(usable),
            )
        )
    return results
