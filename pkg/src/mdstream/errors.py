"""Exception types shared across the package."""


class MdstreamError(Exception):
    """Base class for all errors raised by this package."""


class PdbParseError(MdstreamError):
    """Malformed PDB record. Carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyStructureError(MdstreamError):
    """Input contained no usable ATOM/HETATM records."""


class NotFoundError(MdstreamError):
    """A named entity (chain, trajectory, session) does not exist."""


class CorruptFileError(MdstreamError):
    """Binary trajectory data violates its format. Carries a byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(MdstreamError):
    """File is not one of the supported trajectory formats."""


class OutOfRangeError(MdstreamError, IndexError):
    """Frame or atom index outside the valid range."""


class DegenerateGeometryError(MdstreamError):
    """Measurement undefined for the given geometry (zero-length arm,
    collinear dihedral axis, ...)."""


class InsufficientPointsError(MdstreamError):
    """Superposition needs at least 3 point pairs."""


class InvalidRangeError(MdstreamError):
    """Filter range with min > max."""


class TrajectoryMatchError(MdstreamError):
    """Structure and trajectory disagree on atom count."""


class SelectionError(MdstreamError):
    """Atom selection malformed or out of range."""


class ClustalParseError(MdstreamError):
    """ClustalW alignment text malformed."""


class UnmatchedRowError(MdstreamError):
    """Alignment row could not be matched to any structure chain."""


class AmbiguousMatchError(MdstreamError):
    """Two alignment rows resolved to the same structure chain."""


class DownloadError(MdstreamError):
    """Remote fetch failed (HTTP status, size cap, or transport error)."""


class RecordNotFoundError(MdstreamError):
    """Zenodo record number does not exist."""


class ZenodoProtocolError(MdstreamError):
    """Zenodo response was not the expected JSON shape."""


class NoSupportedFilesError(MdstreamError):
    """Zenodo record holds no file of a supported kind."""

    def __init__(self, record_number: int, files=()):
        super().__init__(f"no supported files in record {record_number}")
        self.record_number = record_number
        self.files = list(files)
