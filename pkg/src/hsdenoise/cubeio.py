"""Cube file format and PGM band export.

A cube file is a 20-byte header followed by the raw voxels:

    bytes 0-3    magic "HSC1"
    bytes 4-15   n1, n2, n3 as little-endian uint32
    byte  16     dtype code (1 = float64)
    bytes 17-19  reserved, zero
    payload      8 * n1 * n2 * n3 bytes, little-endian float64,
                 band-sequential with the vertical index fastest

Band exports are binary 16-bit PGM (P5, maxval 65535, big-endian
samples) after clamping to [0, 1].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cube import HSCube

MAGIC = b"HSC1"
DTYPE_FLOAT64 = 1

_HEADER = struct.Struct("<4sIIIB3s")
HEADER_SIZE = _HEADER.size  # 20


class CubeFormatError(ValueError):
    """Base class for malformed cube files."""


class MagicMismatch(CubeFormatError):
    """The file does not start with the cube magic."""


class TruncatedPayload(CubeFormatError):
    """The file is shorter than its header promises."""


class NonFiniteValues(CubeFormatError):
    """The payload contains NaN or infinity."""


@dataclass(frozen=True)
class CubeFileHeader:
    n1: int
    n2: int
    n3: int
    dtype_code: int = DTYPE_FLOAT64

    def __post_init__(self):
        if min(self.n1, self.n2, self.n3) < 1:
            raise ValueError("dimensions must be positive")

    @property
    def payload_bytes(self) -> int:
        return 8 * self.n1 * self.n2 * self.n3

    def pack(self) -> bytes:
        return _HEADER.pack(
            MAGIC, self.n1, self.n2, self.n3, self.dtype_code, b"\x00\x00\x00"
        )

    @classmethod
    def unpack(cls, raw: bytes) -> "CubeFileHeader":
        if len(raw) < HEADER_SIZE:
            raise TruncatedPayload(
                f"file too short for a header: {len(raw)} < {HEADER_SIZE} bytes"
            )
        magic, n1, n2, n3, dtype_code, _ = _HEADER.unpack(raw[:HEADER_SIZE])
        if magic != MAGIC:
            raise MagicMismatch(f"bad magic {magic!r}")
        if dtype_code != DTYPE_FLOAT64:
            raise CubeFormatError(f"unsupported dtype code {dtype_code}")
        if min(n1, n2, n3) < 1:
            raise CubeFormatError(f"bad dimensions {(n1, n2, n3)}")
        return cls(n1=n1, n2=n2, n3=n3, dtype_code=dtype_code)


def write_cube(cube, path) -> None:
    """Serialize a cube; accepts an HSCube or a 3-d array."""
    if not isinstance(cube, HSCube):
        cube = HSCube(cube)
    header = CubeFileHeader(cube.n1, cube.n2, cube.n3)
    payload = cube.to_flat().astype("<f8", copy=False).tobytes()
    with open(path, "wb") as fh:
        fh.write(header.pack())
        fh.write(payload)


def read_cube(path) -> HSCube:
    raw = Path(path).read_bytes()
    header = CubeFileHeader.unpack(raw)
    body = raw[HEADER_SIZE:]
    if len(body) < header.payload_bytes:
        raise TruncatedPayload(
            f"payload has {len(body)} bytes, expected {header.payload_bytes}"
        )
    if len(body) > header.payload_bytes:
        raise CubeFormatError(
            f"{len(body) - header.payload_bytes} trailing bytes after payload"
        )
    flat = np.frombuffer(body, dtype="<f8")
    if not np.isfinite(flat).all():
        raise NonFiniteValues("payload contains non-finite values")
    return HSCube.from_flat(flat, header.n1, header.n2, header.n3)


def export_band_pgm(cube, band: int, path, scale: float = 1.0) -> None:
    """Write one band as a 16-bit binary PGM.

    Values are multiplied by scale, clamped to [0, 1], then quantized to
    0..65535.  Band indices are zero-based.
    """
    if not isinstance(cube, HSCube):
        cube = HSCube(cube)
    if not 0 <= band < cube.n3:
        raise IndexError(f"band {band} out of range (0..{cube.n3 - 1})")
    if scale <= 0:
        raise ValueError("scale must be positive")
    img = np.clip(cube.band(band) * scale, 0.0, 1.0)
    quant = np.round(img * 65535.0).astype(">u2")
    header = f"P5\n{cube.n2} {cube.n1}\n65535\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(quant.tobytes())
