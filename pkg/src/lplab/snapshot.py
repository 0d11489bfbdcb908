"""FLD1 binary field snapshots with a JSON metadata sidecar.

Layout: magic bytes ``FLD1``, u8 ``n``, u8 ``m``, u32 little-endian ``N``,
then ``m * N**n`` IEEE-754 little-endian float64 physical samples,
component-major, row-major within a component (last axis fastest).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InvalidDataError
from .field import VectorField
from .grid import Grid

MAGIC = b"FLD1"
_HEADER = struct.Struct("<4sBBI")


def field_to_bytes(f: VectorField) -> bytes:
    header = _HEADER.pack(MAGIC, f.grid.n, f.m, f.grid.N)
    body = np.ascontiguousarray(f.phys, dtype="<f8").tobytes()
    return header + body


def field_from_bytes(data: bytes) -> VectorField:
    if len(data) < _HEADER.size:
        raise InvalidDataError("truncated FLD1 data")
    magic, n, m, N = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidDataError(f"bad magic {magic!r}, expected {MAGIC!r}")
    grid = Grid(n=n, N=N)
    count = m * N**n
    expected = _HEADER.size + 8 * count
    if len(data) != expected:
        raise InvalidDataError(f"FLD1 payload has {len(data)} bytes, expected {expected}")
    samples = np.frombuffer(data, dtype="<f8", count=count, offset=_HEADER.size)
    samples = samples.reshape((m,) + grid.physical_shape).astype(np.float64)
    return VectorField.from_physical(grid, samples)


def write_field(path: str | Path, f: VectorField, metadata: dict | None = None) -> Path:
    """Write an FLD1 snapshot; metadata goes to ``<path>.json``."""
    path = Path(path)
    path.write_bytes(field_to_bytes(f))
    if metadata is not None:
        sidecar = path.with_suffix(path.suffix + ".json")
        sidecar.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return path


def read_field(path: str | Path) -> tuple[VectorField, dict | None]:
    path = Path(path)
    f = field_from_bytes(path.read_bytes())
    sidecar = path.with_suffix(path.suffix + ".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else None
    return f, meta
