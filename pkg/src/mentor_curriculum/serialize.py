"""Flat binary checkpoint format shared by the weighting and student nets.

Layout: magic string, then a little-endian uint32 dimension table
(array count, then ndim followed by the dims of each array), then every
array as little-endian float64 in declaration order. Round-trips are
bit-exact.
"""

import struct

import numpy as np

MENTOR_MAGIC = b"MNETv1"
STUDENT_MAGIC = b"SNETv1"


def write_arrays(path, magic, arrays):
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<I", len(arrays)))
        for arr in arrays:
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_arrays(path, magic):
    with open(path, "rb") as fh:
        got = fh.read(len(magic))
        if got != magic:
            raise ValueError(f"bad magic {got!r}, expected {magic!r}")
        (count,) = struct.unpack("<I", fh.read(4))
        shapes = []
        for _ in range(count):
            (ndim,) = struct.unpack("<I", fh.read(4))
            shapes.append(struct.unpack(f"<{ndim}I", fh.read(4 * ndim)))
        arrays = []
        for shape in shapes:
            n = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * n)
            if len(buf) != 8 * n:
                raise ValueError("truncated checkpoint file")
            arrays.append(np.frombuffer(buf, dtype="<f8").reshape(shape).copy())
        if fh.read(1):
            raise ValueError("trailing bytes after checkpoint payload")
    return arrays
