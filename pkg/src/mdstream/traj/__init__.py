"""Binary trajectory readers (XTC, DCD) with random-access frame indexing."""

from mdstream.traj.index import FrameIndex, TrajectoryMeta, read_mdix, write_mdix
from mdstream.traj.reader import TrajectoryReader, open_trajectory, scan_trajectory

__all__ = [
    "FrameIndex",
    "TrajectoryMeta",
    "TrajectoryReader",
    "open_trajectory",
    "read_mdix",
    "scan_trajectory",
    "write_mdix",
]
