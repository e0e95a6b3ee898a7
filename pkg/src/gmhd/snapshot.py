"""Binary field snapshots.

Layout (little-endian):

    4 bytes   magic b"GMHD"
    u32       format version (1)
    u32       dim
    u32       points per axis N
    u32       component count
    f64       time
    payload   for each component, N^dim complex coefficients in row-major
              FFT index order, each stored as (real f64, imag f64)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .spectral import Grid, SpectralField

MAGIC = b"GMHD"
VERSION = 1
_HEADER = struct.Struct("<4sIIIId")


class SnapshotError(ValueError):
    pass


def encode_snapshot(field: SpectralField, time: float) -> bytes:
    grid = field.grid
    header = _HEADER.pack(MAGIC, VERSION, grid.dim, grid.n, field.ncomp, float(time))
    payload = np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes()
    return header + payload


def decode_snapshot(data: bytes) -> tuple[SpectralField, float]:
    if len(data) < _HEADER.size:
        raise SnapshotError("truncated snapshot header")
    magic, version, dim, n, ncomp, time = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    grid = Grid(dim, n)
    count = ncomp * n**dim
    expected = _HEADER.size + 16 * count
    if len(data) != expected:
        raise SnapshotError(f"payload size {len(data) - _HEADER.size} does not match header (expected {16 * count})")
    coeffs = np.frombuffer(data, dtype="<c16", count=count, offset=_HEADER.size)
    return SpectralField(grid, coeffs.reshape((ncomp,) + grid.shape).astype(complex)), time


def write_snapshot(path: str | Path, field: SpectralField, time: float) -> None:
    Path(path).write_bytes(encode_snapshot(field, time))


def read_snapshot(path: str | Path) -> tuple[SpectralField, float]:
    return decode_snapshot(Path(path).read_bytes())
