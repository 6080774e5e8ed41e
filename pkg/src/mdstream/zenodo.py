"""Zenodo record import: list a record's files and classify them by kind.

Only record metadata is fetched here (one GET per record); actual file
downloads go through the trajectory registration path with the file's
download URL.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import requests

from mdstream.errors import (
    NoSupportedFilesError,
    RecordNotFoundError,
    ZenodoProtocolError,
)

ZENODO_API = "https://zenodo.org/api/records"


class FileKind(str, enum.Enum):
    STRUCTURE = "structure"
    TRAJECTORY = "trajectory"
    VOLUME = "volume"
    COMPRESSED = "compressed"
    UNSUPPORTED = "unsupported"


# extension -> kind; longest suffix wins (.tar.gz before .gz)
EXTENSION_KINDS: dict[str, FileKind] = {
    ".pdb": FileKind.STRUCTURE,
    ".cif": FileKind.STRUCTURE,
    ".gro": FileKind.STRUCTURE,
    ".xtc": FileKind.TRAJECTORY,
    ".dcd": FileKind.TRAJECTORY,
    ".trr": FileKind.TRAJECTORY,
    ".mrc": FileKind.VOLUME,
    ".ccp4": FileKind.VOLUME,
    ".dx": FileKind.VOLUME,
    ".zip": FileKind.COMPRESSED,
    ".gz": FileKind.COMPRESSED,
    ".tar.gz": FileKind.COMPRESSED,
}


@dataclass(frozen=True)
class RemoteFile:
    name: str
    download_url: str
    size: int
    kind: FileKind

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "download_url": self.download_url,
            "size": self.size,
            "kind": self.kind.value,
        }


def classify(name: str) -> FileKind:
    """Kind of a file, decided solely by its (lowercased) extension."""
    lowered = name.lower()
    best = FileKind.UNSUPPORTED
    best_len = 0
    for ext, kind in EXTENSION_KINDS.items():
        if lowered.endswith(ext) and len(ext) > best_len:
            best, best_len = kind, len(ext)
    return best


def fetch_record(
    record_number: int,
    session: requests.Session | None = None,
    timeout: float = 30.0,
) -> list[RemoteFile]:
    """List and classify the files of a Zenodo record.

    Raises RecordNotFoundError for unknown records, ZenodoProtocolError for
    unexpected response shapes, and NoSupportedFilesError when every file
    classifies as unsupported (the caller shows that as a notice).
    """
    if not isinstance(record_number, int) or record_number <= 0:
        raise ValueError(f"record number must be a positive integer, got {record_number!r}")
    sess = session or requests.Session()
    resp = sess.get(f"{ZENODO_API}/{record_number}", timeout=timeout)
    if resp.status_code == 404:
        raise RecordNotFoundError(f"Zenodo record {record_number} not found")
    if resp.status_code != 200:
        raise ZenodoProtocolError(
            f"Zenodo returned HTTP {resp.status_code} for record {record_number}"
        )
    try:
        body = resp.json()
    except ValueError as exc:
        raise ZenodoProtocolError("Zenodo response is not JSON") from exc
    if not isinstance(body, dict) or not isinstance(body.get("files"), list):
        raise ZenodoProtocolError('Zenodo response lacks a "files" array')

    files = []
    for entry in body["files"]:
        try:
            name = entry["key"]
            url = entry["links"]["self"]
            size = int(entry.get("size", 0))
        except (KeyError, TypeError) as exc:
            raise ZenodoProtocolError(f"malformed file entry: {entry!r}") from exc
        files.append(RemoteFile(name=name, download_url=url, size=size, kind=classify(name)))

    if files and all(f.kind is FileKind.UNSUPPORTED for f in files):
        raise NoSupportedFilesError(record_number, files)
    if not files:
        raise NoSupportedFilesError(record_number, [])
    return files


def filter_by_type(files: list[RemoteFile], kind: FileKind | str) -> list[RemoteFile]:
    """Order-preserving filter to one kind."""
    kind = FileKind(kind)
    return [f for f in files if f.kind is kind]
