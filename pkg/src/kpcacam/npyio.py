"""Minimal NPY v1/v2 reader and v1 writer.

Only C-order little-endian files are handled; everything is widened to
float64 on load so the rest of the package works in one precision.
"""

import ast
import struct

import numpy as np

from .errors import NpyDtypeError, NpyFormatError, NpyLayoutError

MAGIC = b"\x93NUMPY"

_READABLE_DTYPES = {
    "<f8", "<f4", "<f2",
    "<i8", "<i4", "<i2", "|i1",
    "<u8", "<u4", "<u2", "|u1",
}


def load_npy(path):
    """Read an NPY file into a float64 array of rank <= 3."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise NpyFormatError(f"cannot read {path}: {exc}") from exc

    if len(raw) < 10 or raw[:6] != MAGIC:
        raise NpyFormatError(f"{path}: bad NPY magic")
    major, minor = raw[6], raw[7]
    if major == 1:
        (hlen,) = struct.unpack("<H", raw[8:10])
        header, body = raw[10:10 + hlen], raw[10 + hlen:]
    elif major == 2:
        (hlen,) = struct.unpack("<I", raw[8:12])
        header, body = raw[12:12 + hlen], raw[12 + hlen:]
    else:
        raise NpyFormatError(f"{path}: unsupported NPY version {major}.{minor}")

    try:
        meta = ast.literal_eval(header.decode("latin1"))
        descr = meta["descr"]
        fortran = meta["fortran_order"]
        shape = tuple(meta["shape"])
    except Exception as exc:
        raise NpyFormatError(f"{path}: malformed NPY header") from exc

    if fortran:
        raise NpyLayoutError(f"{path}: Fortran-order NPY files are not supported")
    if descr not in _READABLE_DTYPES:
        raise NpyDtypeError(f"{path}: unsupported element type {descr!r}")
    if len(shape) > 3:
        raise NpyFormatError(f"{path}: rank {len(shape)} exceeds the supported rank 3")

    count = int(np.prod(shape, dtype=np.int64)) if shape else 1
    data = np.frombuffer(body, dtype=np.dtype(descr), count=count)
    return data.reshape(shape).astype(np.float64)


def save_npy(arr, path):
    """Write a float64 C-order NPY v1 file; round-trips bitwise via load_npy."""
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    header = "{'descr': '<f8', 'fortran_order': False, 'shape': %s, }" % (
        _shape_repr(arr.shape),
    )
    # pad with spaces so that magic+len+header is a multiple of 64, '\n' last
    pad = 64 - (len(MAGIC) + 4 + len(header) + 1) % 64
    header = header + " " * pad + "\n"
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(bytes([1, 0]))
            fh.write(struct.pack("<H", len(header)))
            fh.write(header.encode("latin1"))
            fh.write(arr.tobytes())
    except OSError as exc:
        raise NpyFormatError(f"cannot write {path}: {exc}") from exc


def _shape_repr(shape):
    if len(shape) == 1:
        return "(%d,)" % shape
    return "(" + ", ".join(str(s) for s in shape) + ")"
