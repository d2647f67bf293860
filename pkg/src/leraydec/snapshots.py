"""Binary snapshot files for velocity fields in coefficient space.

Layout (little-endian throughout):

    offset  size  field
    0       8     magic "LDSNAP01"
    8       4     u32  n            grid points per direction
    12      8     f64  t            simulation time
    20      8     f64  delta        filter radius (0 when unfiltered)
    28      4     u32  order        deconvolution order (0 when unfiltered)
    32      4     u32  model tag    0 = nse, 1 = leray_deconv
    36      4     u32  layout version (currently 1)
    40      --    3*n^3 complex128  coefficients, C order, component-major

The payload is the raw coefficient array, so a write/read round trip is
bit-exact.  Readers reject unknown magic, newer layout versions, and
truncated payloads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .spectral import Grid, SpectralField

MAGIC = b"LDSNAP01"
LAYOUT_VERSION = 1
_HEADER = struct.Struct("<8sIddIII")

_MODEL_TAGS = {"nse": 0, "leray_deconv": 1}
_MODEL_FAMILIES = {tag: family for family, tag in _MODEL_TAGS.items()}


class SnapshotError(ValueError):
    """Snapshot file rejected: bad magic, version, size, or grid mismatch."""


@dataclass(frozen=True)
class SnapshotMeta:
    n: int
    t: float
    delta: float
    order: int
    model_family: str
    version: int


def write_snapshot(path, field: SpectralField, model_family: str = "nse",
                   delta: float = 0.0, order: int = 0) -> None:
    if model_family not in _MODEL_TAGS:
        raise SnapshotError(f"unknown model family {model_family!r}")
    n = field.grid.n
    header = _HEADER.pack(MAGIC, n, float(field.t), float(delta), int(order),
                          _MODEL_TAGS[model_family], LAYOUT_VERSION)
    payload = np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path, expected_grid: Grid | None = None):
    """Read one snapshot; returns (SpectralField, SnapshotMeta)."""
    with open(path, "rb") as fh:
        raw_header = fh.read(_HEADER.size)
        if len(raw_header) < _HEADER.size:
            raise SnapshotError(f"{path}: truncated header")
        magic, n, t, delta, order, tag, version = _HEADER.unpack(raw_header)
        if magic != MAGIC:
            raise SnapshotError(f"{path}: bad magic {magic!r}")
        if version > LAYOUT_VERSION:
            raise SnapshotError(f"{path}: layout version {version} is newer than supported ({LAYOUT_VERSION})")
        if tag not in _MODEL_FAMILIES:
            raise SnapshotError(f"{path}: unknown model tag {tag}")
        payload = fh.read()

    expected_bytes = 3 * n * n * n * 16
    if len(payload) != expected_bytes:
        raise SnapshotError(f"{path}: payload is {len(payload)} bytes, expected {expected_bytes}")

    if expected_grid is not None:
        if expected_grid.n != n:
            raise SnapshotError(f"{path}: grid n={n} does not match expected n={expected_grid.n}")
        grid = expected_grid
    else:
        grid = Grid(n)

    coeffs = np.frombuffer(payload, dtype="<c16").astype(np.complex128).reshape(3, n, n, n)
    meta = SnapshotMeta(n=n, t=t, delta=delta, order=order,
                        model_family=_MODEL_FAMILIES[tag], version=version)
    return SpectralField(grid=grid, coeffs=coeffs, t=t), meta
