"""Molecular-dynamics trajectory streaming: file indexing, frame-on-demand
serving, interactive measurement time-traces, and alignment-driven
superposition."""

__version__ = "0.1.0"

from mdstream.model import (
    Atom,
    Frame,
    Residue,
    Selection,
    Structure,
    chain_sequence,
    parse_pdb,
)

__all__ = [
    "Atom",
    "Frame",
    "Residue",
    "Selection",
    "Structure",
    "chain_sequence",
    "parse_pdb",
    "__version__",
]
