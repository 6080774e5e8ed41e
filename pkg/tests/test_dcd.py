"""DCD container format: endianness, records, unit cells, error paths."""

import io
import struct

import numpy as np
import pytest

from mdstream.errors import CorruptFileError, OutOfRangeError, UnsupportedFormatError
from mdstream.traj.dcd import dcd_read_frame, dcd_scan, write_dcd, _parse_header


def make_file(frames, **kw):
    buf = io.BytesIO()
    write_dcd(buf, frames, **kw)
    buf.seek(0)
    return buf


def random_frames(n_frames=4, n_atoms=10, seed=0):
    rng = np.random.default_rng(seed)
    return [rng.normal(10, 3, (n_atoms, 3)).astype(np.float32) for _ in range(n_frames)]


class TestScan:
    def test_frame_length_no_cell(self):
        # three records of (4 + 4*natoms + 4) bytes each
        buf = make_file(random_frames(10, 100))
        meta, index = dcd_scan(buf)
        assert meta.n_frames == 10
        assert meta.n_atoms == 100
        assert all(length == 3 * (4 + 400 + 4) == 1224 for length in index.lengths)

    def test_endian_twins_parse_identically(self, data_dir):
        results = []
        for name in ("golden_le.dcd", "golden_be.dcd"):
            with open(data_dir / name, "rb") as fh:
                meta, index = dcd_scan(fh)
                layout = _parse_header(fh)
                frames = [
                    dcd_read_frame(fh, layout, index, i).coords
                    for i in range(meta.n_frames)
                ]
            results.append((meta.n_atoms, meta.n_frames, meta.timestep_ps, frames))
        (na1, nf1, dt1, f1), (na2, nf2, dt2, f2) = results
        assert (na1, nf1, dt1) == (na2, nf2, dt2)
        for a, b in zip(f1, f2):
            assert np.array_equal(a, b)

    def test_veld_tag_unsupported(self):
        buf = make_file(random_frames(), tag=b"VELD")
        with pytest.raises(UnsupportedFormatError):
            dcd_scan(buf)

    def test_first_marker_not_84(self):
        buf = make_file(random_frames())
        raw = bytearray(buf.getvalue())
        struct.pack_into("<i", raw, 0, 99)
        with pytest.raises(UnsupportedFormatError):
            dcd_scan(io.BytesIO(bytes(raw)))

    def test_record_suffix_mismatch(self):
        buf = make_file(random_frames(2, 5))
        raw = bytearray(buf.getvalue())
        # corrupt the suffix marker of the title record (header is 4+84+4)
        title_len = struct.unpack_from("<i", raw, 92)[0]
        struct.pack_into("<i", raw, 96 + title_len, 7)
        with pytest.raises(CorruptFileError):
            dcd_scan(io.BytesIO(bytes(raw)))

    def test_truncated_final_frame(self):
        buf = make_file(random_frames(3, 8))
        raw = buf.getvalue()[:-6]
        meta, index = dcd_scan(io.BytesIO(raw))
        assert meta.n_frames == 2
        assert index.truncated


class TestReadFrame:
    def test_deinterleave(self):
        frame = np.array([[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]], np.float32)
        buf = make_file([frame])
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        out = dcd_read_frame(buf, layout, index, 0)
        assert out.coords.tolist() == [[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]]
        # raw records really hold X then Y then Z contiguously
        raw = buf.getvalue()
        first = index.offsets[0]
        xs = np.frombuffer(raw[first + 4 : first + 12], "<f4")
        assert xs.tolist() == [1.0, 2.0]

    def test_orthorhombic_unit_cell(self):
        buf = make_file(random_frames(2, 4), unitcell=(30.0, 90.0, 30.0, 90.0, 90.0, 30.0))
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        frame = dcd_read_frame(buf, layout, index, 0)
        assert np.allclose(frame.box, np.diag([30.0, 30.0, 30.0]))

    def test_cosine_unit_cell_accepted(self):
        buf = make_file(random_frames(1, 4), unitcell=(30.0, 0.0, 30.0, 0.0, 0.0, 30.0))
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        frame = dcd_read_frame(buf, layout, index, 0)
        assert np.allclose(frame.box, np.diag([30.0, 30.0, 30.0]))

    def test_identity_zero_box_without_cell(self):
        buf = make_file(random_frames(1, 4))
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        frame = dcd_read_frame(buf, layout, index, 0)
        assert np.array_equal(frame.box, np.zeros((3, 3), np.float32))

    def test_time_with_delta(self):
        buf = make_file(random_frames(3, 4), timestep_ps=0.5)
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        assert meta.timestep_ps == 0.5
        assert dcd_read_frame(buf, layout, index, 2).time_ps == 1.0

    def test_time_without_delta(self):
        buf = make_file(random_frames(3, 4))
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        assert meta.timestep_ps is None
        assert dcd_read_frame(buf, layout, index, 2).time_ps == 2.0

    def test_random_access_equals_sequential(self):
        frames = random_frames(6, 20, seed=9)
        buf = make_file(frames, unitcell=(25, 90, 25, 90, 90, 25), timestep_ps=2.0)
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        sequential = [dcd_read_frame(buf, layout, index, i).coords for i in range(6)]
        for i in (4, 1, 5, 0, 3, 2):
            got = dcd_read_frame(buf, layout, index, i)
            assert np.array_equal(got.coords, sequential[i])
            assert np.array_equal(got.coords, frames[i])

    def test_out_of_range(self):
        buf = make_file(random_frames(2, 4))
        meta, index = dcd_scan(buf)
        layout = _parse_header(buf)
        with pytest.raises(OutOfRangeError):
            dcd_read_frame(buf, layout, index, 2)


class CountingFile:
    def __init__(self, fh):
        self.fh = fh
        self.bytes_read = 0

    def read(self, n=-1):
        data = self.fh.read(n)
        self.bytes_read += len(data)
        return data

    def seek(self, *a):
        return self.fh.seek(*a)

    def tell(self):
        return self.fh.tell()


def test_single_frame_read_is_o_frame_size():
    frames = random_frames(20, 50, seed=3)
    buf = make_file(frames, unitcell=(25, 90, 25, 90, 90, 25))
    meta, index = dcd_scan(buf)
    layout = _parse_header(buf)
    counting = CountingFile(buf)
    for i in (0, 10, 19):
        counting.bytes_read = 0
        dcd_read_frame(counting, layout, index, i)
        assert counting.bytes_read <= index.lengths[i]
        assert counting.bytes_read < meta.file_size / 4


def test_scan_idempotent_and_read_only():
    frames = random_frames(4, 6, seed=5)
    buf = make_file(frames, timestep_ps=0.5)
    before = buf.getvalue()
    m1, i1 = dcd_scan(buf)
    m2, i2 = dcd_scan(buf)
    assert m1 == m2
    assert i1.offsets == i2.offsets and i1.lengths == i2.lengths
    assert buf.getvalue() == before
