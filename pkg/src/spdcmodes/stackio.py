"""Binary container for frame stacks.

Layout (all integers little-endian):

    offset  size  field
    0       4     magic, ASCII "QSTK"
    4       4     version, u32, currently 1
    8       4     n_rows, u32
    12      4     n_cols, u32
    16      4     n_frames, u32
    20      1     dtype code, u8; 1 = float32 little-endian
    21      3     reserved, zero
    24      ...   frame data, n_frames * n_rows * n_cols float32,
                  row-major, frame index slowest

A text sidecar at <path>.meta carries the sampling geometry as key=value
lines (pitch_mrad, center_row, center_col, gain, seed). Round-tripping a
stack through write/read is lossless.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import format_keyvalues, parse_keyvalues
from .errors import DataError, FormatError
from .synth import ImageStack

__all__ = ["MAGIC", "VERSION", "DTYPE_F32", "StackFileHeader", "write_stack", "read_stack"]

MAGIC = b"QSTK"
VERSION = 1
DTYPE_F32 = 1

_HEADER = struct.Struct("<4sIIIIB3x")
HEADER_SIZE = _HEADER.size  # 24


@dataclass(frozen=True)
class StackFileHeader:
    n_rows: int
    n_cols: int
    n_frames: int
    dtype_code: int = DTYPE_F32
    version: int = VERSION

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC, self.version, self.n_rows, self.n_cols, self.n_frames, self.dtype_code
        )

    @classmethod
    def unpack(cls, blob: bytes) -> "StackFileHeader":
        if len(blob) < HEADER_SIZE:
            raise FormatError(
                f"truncated header: {len(blob)} of {HEADER_SIZE} bytes", offset=len(blob)
            )
        magic, version, n_rows, n_cols, n_frames, dtype_code = _HEADER.unpack_from(blob)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
        if version != VERSION:
            raise FormatError(f"unsupported version {version}", offset=4)
        if n_rows == 0 or n_cols == 0 or n_frames == 0:
            raise FormatError("zero-sized stack dimensions", offset=8)
        if dtype_code != DTYPE_F32:
            raise FormatError(f"unknown dtype code {dtype_code}", offset=20)
        return cls(n_rows=n_rows, n_cols=n_cols, n_frames=n_frames,
                   dtype_code=dtype_code, version=version)

    @property
    def payload_bytes(self) -> int:
        return 4 * self.n_rows * self.n_cols * self.n_frames


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta")


def write_stack(path: str | Path, stack: ImageStack) -> None:
    """Write the container and its .meta sidecar."""
    path = Path(path)
    m, n_rows, n_cols = stack.frames.shape
    header = StackFileHeader(n_rows=n_rows, n_cols=n_cols, n_frames=m)
    data = np.ascontiguousarray(stack.frames, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(header.pack())
        fh.write(data.tobytes())
    meta = {
        "pitch_mrad": repr(float(stack.pitch_mrad)),
        "center_row": str(stack.center_row),
        "center_col": str(stack.center_col),
        "gain": repr(float(stack.metadata.get("gain", 0.0))),
        "seed": str(stack.metadata.get("seed", 0)),
    }
    _sidecar_path(path).write_text(format_keyvalues(meta))


def read_stack(path: str | Path) -> ImageStack:
    """Read a container written by write_stack; validates layout strictly."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read stack file {path}: {exc}") from exc
    header = StackFileHeader.unpack(blob)
    expected = HEADER_SIZE + header.payload_bytes
    if len(blob) < expected:
        raise FormatError(
            f"truncated payload: file has {len(blob)} bytes, layout needs {expected}",
            offset=len(blob),
        )
    if len(blob) > expected:
        raise FormatError(
            f"trailing bytes after payload: file has {len(blob)} bytes, "
            f"layout needs {expected}",
            offset=expected,
        )
    frames = np.frombuffer(
        blob, dtype="<f4", count=header.n_frames * header.n_rows * header.n_cols,
        offset=HEADER_SIZE,
    ).reshape(header.n_frames, header.n_rows, header.n_cols)

    side = _sidecar_path(path)
    if not side.is_file():
        raise FormatError(f"missing sidecar {side.name}")
    raw = parse_keyvalues(side.read_text(), source=side.name)
    required = ("pitch_mrad", "center_row", "center_col", "gain", "seed")
    missing = [k for k in required if k not in raw]
    if missing:
        raise FormatError(f"sidecar {side.name} missing keys: {', '.join(missing)}")
    try:
        pitch = float(raw["pitch_mrad"])
        center_row = int(raw["center_row"])
        center_col = int(raw["center_col"])
        gain = float(raw["gain"])
        seed = int(raw["seed"])
    except ValueError as exc:
        raise FormatError(f"sidecar {side.name} has a malformed value: {exc}") from exc
    return ImageStack(
        frames=frames.copy(),
        pitch_mrad=pitch,
        center_row=center_row,
        center_col=center_col,
        metadata={"gain": gain, "seed": seed},
    )
