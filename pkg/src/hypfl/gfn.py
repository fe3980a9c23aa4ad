"""GFN1 binary container for lattice fields.

Layout (all integers little-endian):

    bytes 0..3   magic "GFN1"
    u32          d                  (1 or 2)
    d x u32      points per axis    (all equal, power of two >= 8)
    n^d x c16    complex values as (re, im) float64 pairs, row-major

Writing then reading is bit-exact; every malformed input maps to a
distinct diagnostic below.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import GridFunction, GridSpec

MAGIC = b"GFN1"


class GfnError(Exception):
    """Base class for GFN1 container errors."""


class BadMagic(GfnError):
    pass


class TruncatedPayload(GfnError):
    pass


class UnsupportedDimension(GfnError):
    pass


class NonPowerOfTwo(GfnError):
    pass


class UnequalAxes(GfnError):
    pass


def write_gfn(path, f: GridFunction) -> None:
    grid = f.grid
    header = struct.pack("<4sI", MAGIC, grid.d) + struct.pack(f"<{grid.d}I", *([grid.n] * grid.d))
    payload = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_gfn(path) -> GridFunction:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 8:
        raise TruncatedPayload(f"header needs 8 bytes, file has {len(blob)}")
    magic, d = struct.unpack_from("<4sI", blob, 0)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {magic!r}")
    if d not in (1, 2):
        raise UnsupportedDimension(f"dimension must be 1 or 2, got {d}")
    axes_end = 8 + 4 * d
    if len(blob) < axes_end:
        raise TruncatedPayload(f"axis table needs {axes_end} bytes, file has {len(blob)}")
    ns = struct.unpack_from(f"<{d}I", blob, 8)
    if len(set(ns)) != 1:
        raise UnequalAxes(f"axes must agree, got {ns}")
    n = ns[0]
    if n < 8 or (n & (n - 1)) != 0:
        raise NonPowerOfTwo(f"points per axis must be a power of two >= 8, got {n}")
    expected = axes_end + 16 * n ** d
    if len(blob) != expected:
        raise TruncatedPayload(f"expected {expected} bytes ({n}^{d} complex values), found {len(blob)}")
    values = np.frombuffer(blob[axes_end:], dtype="<c16").astype(np.complex128)
    return GridFunction(GridSpec(d, n), values.reshape((n,) * d))
