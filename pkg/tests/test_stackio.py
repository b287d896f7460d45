"""Binary container round-trip and strict layout validation."""

import struct

import numpy as np
import pytest

from spdcmodes.errors import DataError, FormatError
from spdcmodes.stackio import (
    DTYPE_F32,
    HEADER_SIZE,
    MAGIC,
    VERSION,
    StackFileHeader,
    read_stack,
    write_stack,
)
from spdcmodes.synth import ImageStack


@pytest.fixture()
def stack():
    rng = np.random.default_rng(8)
    frames = rng.random((3, 5, 4)).astype(np.float32) * 100.0
    return ImageStack(frames, 0.625, 2, 2, metadata={"gain": 1.49, "seed": 42})


@pytest.fixture()
def written(tmp_path, stack):
    path = tmp_path / "frames.qstk"
    write_stack(path, stack)
    return path


class TestHeader:
    def test_layout_constants(self):
        assert MAGIC == b"QSTK"
        assert VERSION == 1
        assert HEADER_SIZE == 24

    def test_pack_unpack_round_trip(self):
        header = StackFileHeader(n_rows=5, n_cols=4, n_frames=3)
        blob = header.pack()
        assert len(blob) == HEADER_SIZE
        assert blob[:4] == MAGIC
        again = StackFileHeader.unpack(blob + b"\x00" * 60)
        assert (again.n_rows, again.n_cols, again.n_frames) == (5, 4, 3)


class TestRoundTrip:
    def test_bitwise_frames(self, written, stack):
        loaded = read_stack(written)
        np.testing.assert_array_equal(loaded.frames, stack.frames)
        assert loaded.frames.dtype == np.float32

    def test_geometry_and_metadata(self, written, stack):
        loaded = read_stack(written)
        assert loaded.pitch_mrad == stack.pitch_mrad
        assert loaded.center_row == 2
        assert loaded.center_col == 2
        assert loaded.metadata["gain"] == 1.49
        assert loaded.metadata["seed"] == 42

    def test_sidecar_written_beside_container(self, written):
        assert written.with_name(written.name + ".meta").is_file()


def _corrupt(path, offset, new_bytes):
    blob = bytearray(path.read_bytes())
    blob[offset : offset + len(new_bytes)] = new_bytes
    path.write_bytes(bytes(blob))


class TestLayoutValidation:
    def test_truncated_header(self, written):
        blob = written.read_bytes()
        written.write_bytes(blob[:10])
        with pytest.raises(FormatError) as info:
            read_stack(written)
        assert info.value.offset == 10

    def test_bad_magic(self, written):
        _corrupt(written, 0, b"JUNK")
        with pytest.raises(FormatError) as info:
            read_stack(written)
        assert info.value.offset == 0

    def test_bad_version(self, written):
        _corrupt(written, 4, struct.pack("<I", 9))
        with pytest.raises(FormatError) as info:
            read_stack(written)
        assert info.value.offset == 4

    def test_zero_dimension(self, written):
        _corrupt(written, 8, struct.pack("<I", 0))
        with pytest.raises(FormatError) as info:
            read_stack(written)
        assert info.value.offset == 8

    def test_unknown_dtype(self, written):
        assert DTYPE_F32 == 1
        _corrupt(written, 20, bytes([7]))
        with pytest.raises(FormatError) as info:
            read_stack(written)
        assert info.value.offset == 20

    def test_truncated_payload(self, written):
        blob = written.read_bytes()
        written.write_bytes(blob[:-8])
        with pytest.raises(FormatError) as info:
            read_stack(written)
        assert info.value.offset == len(blob) - 8

    def test_trailing_bytes(self, written):
        blob = written.read_bytes()
        written.write_bytes(blob + b"\x00\x00")
        with pytest.raises(FormatError) as info:
            read_stack(written)
        assert info.value.offset == len(blob)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_stack(tmp_path / "absent.qstk")


class TestSidecarValidation:
    def test_missing_sidecar(self, written):
        written.with_name(written.name + ".meta").unlink()
        with pytest.raises(FormatError):
            read_stack(written)

    def test_missing_key(self, written):
        side = written.with_name(written.name + ".meta")
        lines = [
            ln for ln in side.read_text().splitlines()
            if not ln.startswith("pitch_mrad")
        ]
        side.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="pitch_mrad"):
            read_stack(written)

    def test_malformed_value(self, written):
        side = written.with_name(written.name + ".meta")
        text = side.read_text().replace("center_row=2", "center_row=two")
        side.write_text(text)
        with pytest.raises(FormatError):
            read_stack(written)
