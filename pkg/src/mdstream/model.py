"""Structural data model shared by every other module.

Structures come from PDB v3.3 fixed-column text; frames come from the
trajectory readers. Both are immutable after construction so they can be
shared freely between concurrent request handlers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mdstream.errors import (
    EmptyStructureError,
    NotFoundError,
    PdbParseError,
    SelectionError,
)

# Standard 20 amino acids, 3-letter -> 1-letter. Anything else maps to 'X'.
THREE_TO_ONE = {
    "ALA": "A", "ARG": "R", "ASN": "N", "ASP": "D", "CYS": "C",
    "GLN": "Q", "GLU": "E", "GLY": "G", "HIS": "H", "ILE": "I",
    "LEU": "L", "LYS": "K", "MET": "M", "PHE": "F", "PRO": "P",
    "SER": "S", "THR": "T", "TRP": "W", "TYR": "Y", "VAL": "V",
}


@dataclass(frozen=True, slots=True)
class Atom:
    serial: int
    name: str
    element: str
    residue_index: int


@dataclass(frozen=True, slots=True)
class Residue:
    name: str
    seq_id: int
    chain_id: str
    atom_start: int
    atom_stop: int  # exclusive

    @property
    def atom_range(self) -> range:
        return range(self.atom_start, self.atom_stop)

    @property
    def n_atoms(self) -> int:
        return self.atom_stop - self.atom_start


@dataclass(eq=False)
class Structure:
    id: str
    atoms: tuple[Atom, ...]
    residues: tuple[Residue, ...]
    chains: tuple[str, ...]
    reference_coords: np.ndarray  # (N, 3) float64, Angstrom

    def __post_init__(self):
        self.atoms = tuple(self.atoms)
        self.residues = tuple(self.residues)
        self.chains = tuple(self.chains)
        coords = np.asarray(self.reference_coords, dtype=np.float64)
        if coords.shape != (len(self.atoms), 3):
            raise ValueError(
                f"reference_coords shape {coords.shape} does not match "
                f"{len(self.atoms)} atoms"
            )
        if sum(r.n_atoms for r in self.residues) != len(self.atoms):
            raise ValueError("residue atom ranges do not cover the atom list")
        coords.setflags(write=False)
        self.reference_coords = coords

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def chain_residues(self, chain_id: str) -> list[Residue]:
        found = [r for r in self.residues if r.chain_id == chain_id]
        if not found:
            raise NotFoundError(f"structure {self.id!r} has no chain {chain_id!r}")
        return found


@dataclass(eq=False)
class Frame:
    frame_number: int
    time_ps: float
    box: np.ndarray  # (3, 3) float32, Angstrom, row vectors
    coords: np.ndarray  # (N, 3) float32, Angstrom

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=np.float32).reshape(3, 3)
        self.coords = np.asarray(self.coords, dtype=np.float32)
        if self.coords.ndim != 2 or self.coords.shape[1] != 3:
            raise ValueError(f"coords must be (N, 3), got {self.coords.shape}")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError(f"frame {self.frame_number}: non-finite coordinate")
        self.box.setflags(write=False)
        self.coords.setflags(write=False)

    @property
    def n_atoms(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class Selection:
    """Ordered set of atom indices, strictly ascending."""

    atom_indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.atom_indices)
        if any(i < 0 for i in idx):
            raise SelectionError("negative atom index")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise SelectionError("atom indices must be strictly ascending")
        object.__setattr__(self, "atom_indices", idx)

    @classmethod
    def of(cls, indices) -> "Selection":
        return cls(tuple(sorted(set(int(i) for i in indices))))

    @classmethod
    def all_atoms(cls, n: int) -> "Selection":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.atom_indices)

    def validate_for(self, n_atoms: int) -> None:
        if self.atom_indices and self.atom_indices[-1] >= n_atoms:
            raise SelectionError(
                f"atom index {self.atom_indices[-1]} out of range for "
                f"{n_atoms} atoms"
            )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.atom_indices, dtype=np.int64)


def _parse_int(text: str, what: str, line_number: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise PdbParseError(f"malformed {what} field {text!r}", line_number) from None


def _parse_float(text: str, what: str, line_number: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise PdbParseError(f"malformed {what} field {text!r}", line_number) from None


def parse_pdb(data: bytes | str, structure_id: str = "structure") -> Structure:
    """Parse PDB v3.3 fixed-column text into a Structure.

    Only the first model is read (MODEL 2+ ignored; ENDMDL/END terminate).
    HETATM records are kept; alternate locations other than ' '/'A' are
    dropped so the atom count is deterministic.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8", errors="replace")
    else:
        text = data

    atoms: list[Atom] = []
    coords: list[tuple[float, float, float]] = []
    residues: list[Residue] = []
    chains: list[str] = []
    seen_serials: set[int] = set()
    closed_chains: set[str] = set()
    current_res_key = None

    for lineno, line in enumerate(text.splitlines(), start=1):
        record = line[0:6]
        if record in ("ENDMDL", "END   ") or line.rstrip() == "END":
            break
        if not (record == "ATOM  " or record == "HETATM"):
            continue
        if len(line) < 54:
            raise PdbParseError("ATOM record shorter than coordinate fields", lineno)

        altloc = line[16]
        if altloc not in (" ", "A"):
            continue

        serial = _parse_int(line[6:11].strip(), "serial", lineno)
        name = line[12:16].strip()
        resname = line[17:20].strip()
        chain_id = line[21]
        resseq = _parse_int(line[22:26].strip(), "resSeq", lineno)
        icode = line[26] if len(line) > 26 else " "
        x = _parse_float(line[30:38].strip(), "x", lineno)
        y = _parse_float(line[38:46].strip(), "y", lineno)
        z = _parse_float(line[46:54].strip(), "z", lineno)
        element = line[76:78].strip() if len(line) > 76 else ""

        if serial in seen_serials:
            raise PdbParseError(f"duplicate atom serial {serial}", lineno)
        seen_serials.add(serial)

        res_key = (chain_id, resseq, icode, resname)
        if res_key != current_res_key:
            if residues:
                prev = residues[-1]
                residues[-1] = Residue(
                    prev.name, prev.seq_id, prev.chain_id, prev.atom_start, len(atoms)
                )
            if not chains or chains[-1] != chain_id:
                if chain_id in closed_chains:
                    raise PdbParseError(
                        f"chain {chain_id!r} reappears non-contiguously", lineno
                    )
                if chains:
                    closed_chains.add(chains[-1])
                chains.append(chain_id)
            residues.append(Residue(resname, resseq, chain_id, len(atoms), len(atoms)))
            current_res_key = res_key

        atoms.append(Atom(serial, name, element, len(residues) - 1))
        coords.append((x, y, z))

    if not atoms:
        raise EmptyStructureError("no ATOM/HETATM records in input")

    prev = residues[-1]
    residues[-1] = Residue(prev.name, prev.seq_id, prev.chain_id, prev.atom_start, len(atoms))

    return Structure(
        id=structure_id,
        atoms=tuple(atoms),
        residues=tuple(residues),
        chains=tuple(chains),
        reference_coords=np.array(coords, dtype=np.float64),
    )


def chain_sequence(structure: Structure, chain_id: str) -> str:
    """One-letter sequence of a chain, residues in file order.

    Residue names outside the standard 20-amino-acid table map to 'X'.
    """
    return "".join(
        THREE_TO_ONE.get(r.name, "X") for r in structure.chain_residues(chain_id)
    )


def structure_to_pdb(structure: Structure) -> str:
    """Serialize atoms back to ATOM records (3-decimal coordinates).

    parse_pdb(structure_to_pdb(s)) reproduces s up to PDB precision.
    """
    lines = []
    for i, atom in enumerate(structure.atoms):
        res = structure.residues[atom.residue_index]
        x, y, z = structure.reference_coords[i]
        # Atom names starting in column 13 only for 4-char names / 2-char elements.
        name = atom.name if len(atom.name) == 4 else f" {atom.name:<3s}"
        lines.append(
            f"ATOM  {atom.serial:5d} {name}{'':1s}{res.name:>3s} {res.chain_id}"
            f"{res.seq_id:4d}    {x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}"
            f"          {atom.element:>2s}"
        )
    lines.append("END")
    return "\n".join(lines) + "\n"
