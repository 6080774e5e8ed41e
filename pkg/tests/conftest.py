"""Shared fixtures: tiny structures and synthetic trajectories."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mdstream.model import THREE_TO_ONE, parse_pdb
from mdstream.traj.dcd import write_dcd
from mdstream.traj.xtc import write_xtc

DATA_DIR = Path(__file__).parent / "data"
ONE_TO_THREE = {v: k for k, v in THREE_TO_ONE.items()}


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


def pdb_atom_line(serial, name, resname, chain, resseq, x, y, z, element=" C"):
    name_field = name if len(name) == 4 else f" {name:<3s}"
    return (
        f"ATOM  {serial:5d} {name_field} {resname:>3s} {chain}{resseq:4d}    "
        f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00          {element:>2s}"
    )


def build_structure_pdb(chains: dict[str, str], rng=None, jitter=0.0) -> str:
    """PDB text with one N/CA/C backbone triple per residue.

    chains maps chain id -> one-letter sequence. Coordinates walk along x
    per residue with slight offsets per atom so geometry is non-degenerate.
    """
    rng = rng or np.random.default_rng(0)
    lines = []
    serial = 1
    resseq_base = 0
    for chain_id, seq in chains.items():
        for i, letter in enumerate(seq):
            resname = ONE_TO_THREE.get(letter, "UNK")
            base = np.array([3.8 * (resseq_base + i), 0.4 * (i % 5), 0.3 * (i % 7)])
            if jitter:
                base = base + rng.normal(0, jitter, 3)
            for atom_name, offset in (("N", (-1.2, 0.3, 0.0)), ("CA", (0.0, 0.0, 0.0)),
                                      ("C", (1.1, -0.4, 0.2))):
                x, y, z = base + np.asarray(offset)
                element = atom_name[0]
                lines.append(
                    pdb_atom_line(serial, atom_name, resname, chain_id, i + 1,
                                  x, y, z, element=f" {element}")
                )
                serial += 1
        resseq_base += len(seq) + 3
    lines.append("END")
    return "\n".join(lines) + "\n"


def make_linear_xtc(path: Path, n_frames: int = 10) -> Path:
    """Two atoms; atom 1 sits t Angstrom from atom 0 at frame t.

    Two atoms keep the file on the raw-float branch, so distances are exact.
    """
    frames = []
    for t in range(n_frames):
        frames.append(np.array([[0.0, 0.0, 0.0], [t / 10.0, 0.0, 0.0]], np.float32))
    with open(path, "wb") as fh:
        write_xtc(fh, frames, times_ps=[0.5 * t for t in range(n_frames)])
    return path


def contact_event_distances() -> list[float]:
    """100 distance values (Angstrom): high start, drop near frame 15,
    oscillation, and a single dip to 2.91 at frame 88."""
    values = []
    for t in range(100):
        if t < 15:
            values.append(round(12.0 - 0.1 * t, 2))
        elif t == 88:
            values.append(2.91)
        else:
            values.append(round(3.3 + 0.09 * ((t * 7) % 10), 2))
    return values


def make_contact_event_xtc(path: Path) -> tuple[Path, list[float]]:
    """12-atom, 100-frame compressed trajectory embedding contact_event_distances
    between atoms 0 and 1; every target distance is on the 0.01 A grid so
    quantization at precision 1000 keeps the event values."""
    distances = contact_event_distances()
    rng = np.random.default_rng(88)
    static = rng.uniform(3.0, 5.0, (10, 3)).astype(np.float32)
    frames = []
    for t, d in enumerate(distances):
        coords = np.empty((12, 3), np.float32)
        coords[0] = (1.0, 1.0, 1.0)
        coords[1] = (1.0 + d / 10.0, 1.0, 1.0)
        coords[2:] = static
        frames.append(coords)
    with open(path, "wb") as fh:
        write_xtc(fh, frames, times_ps=[2.0 * t for t in range(100)],
                  box_nm=np.diag([8.0, 8.0, 8.0]), precision=1000.0)
    return path, distances


def make_matching_pdb_for_traj(path: Path, n_atoms: int) -> Path:
    """A structure with exactly n_atoms atoms so trajectories match."""
    lines = []
    for i in range(n_atoms):
        lines.append(
            pdb_atom_line(i + 1, "CA", "GLY", "A", i + 1, float(i), 0.0, 0.0)
        )
    lines.append("END")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture(scope="session")
def linear_xtc(tmp_path_factory) -> Path:
    return make_linear_xtc(tmp_path_factory.mktemp("linear") / "linear.xtc")


@pytest.fixture(scope="session")
def contact_event_xtc(tmp_path_factory):
    return make_contact_event_xtc(tmp_path_factory.mktemp("contact-event") / "contact_event.xtc")


@pytest.fixture(scope="session")
def water_dcd(tmp_path_factory) -> Path:
    """Mid-sized DCD for streaming tests: 60 frames x 900 atoms."""
    rng = np.random.default_rng(5)
    frames = [rng.normal(20.0, 6.0, (900, 3)).astype(np.float32) for _ in range(60)]
    path = tmp_path_factory.mktemp("dcd") / "water.dcd"
    with open(path, "wb") as fh:
        write_dcd(fh, frames, unitcell=(40.0, 90.0, 40.0, 90.0, 90.0, 40.0),
                  timestep_ps=1.0)
    return path


@pytest.fixture
def two_chain_structure():
    text = build_structure_pdb({"A": "ACDEFGHIK", "B": "LMNPQRSTV"})
    return parse_pdb(text, structure_id="twochain")
