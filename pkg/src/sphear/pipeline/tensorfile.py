"""Binary tensor container for feature interchange.

Layout (all integers little-endian):

    magic   4 bytes  b"SHTF"
    version u32      currently 1
    dtype   u32      0=float32, 1=float64, 2=complex64, 3=complex128
    ndim    u32
    dims    ndim x u64
    payload row-major little-endian values; complex values are stored as
            interleaved (real, imag) pairs, which is their native layout

The payload length must equal the product of the dims times the element
size; anything else is rejected on read.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .ioutil import atomic_write_bytes

MAGIC = b"SHTF"
VERSION = 1

_CODE_TO_DTYPE = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<c8"),
    3: np.dtype("<c16"),
}
_KIND_TO_CODE = {"<f4": 0, "<f8": 1, "<c8": 2, "<c16": 3}


def write_tensor(path: Path | str, array: np.ndarray):
    """Serialize an array; dtype must be one of the four supported kinds."""
    array = np.asarray(array)
    canonical = {
        np.dtype(np.float32): "<f4",
        np.dtype(np.float64): "<f8",
        np.dtype(np.complex64): "<c8",
        np.dtype(np.complex128): "<c16",
    }.get(array.dtype.newbyteorder("="))
    if canonical is None:
        raise ValueError(f"unsupported tensor dtype {array.dtype}")
    payload = np.ascontiguousarray(array).astype(canonical, copy=False)
    header = MAGIC + struct.pack("<III", VERSION, _KIND_TO_CODE[canonical], array.ndim)
    header += struct.pack(f"<{array.ndim}Q", *array.shape)
    atomic_write_bytes(path, header + payload.tobytes())


def read_tensor(path: Path | str) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a tensor file (bad magic {raw[:4]!r})")
    version, code, ndim = struct.unpack_from("<III", raw, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    if code not in _CODE_TO_DTYPE:
        raise ValueError(f"{path}: unknown dtype code {code}")
    dims = struct.unpack_from(f"<{ndim}Q", raw, 16)
    dtype = _CODE_TO_DTYPE[code]
    offset = 16 + 8 * ndim
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    if len(raw) - offset != expected:
        raise ValueError(
            f"{path}: payload is {len(raw) - offset} bytes, expected {expected}"
        )
    return np.frombuffer(raw, dtype=dtype, offset=offset).reshape(dims).copy()
