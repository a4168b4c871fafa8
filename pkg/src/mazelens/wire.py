"""Binary tensor wire format for HTTP payloads.

Layout (little-endian): magic "TNSR", ndim u32, dims u32 x ndim, then
the float32 payload in row-major order. Activation tensors are too
large for comfortable JSON at interactive rates; everything else on the
wire stays JSON.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError

MAGIC = b"TNSR"


def encode_tensor(arr: np.ndarray) -> bytes:
    a = np.ascontiguousarray(arr, dtype="<f4")
    header = MAGIC + struct.pack("<I", a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape)
    return header + a.tobytes()


def decode_tensor(data: bytes) -> np.ndarray:
    if len(data) < 8 or data[:4] != MAGIC:
        raise FormatError("not a TNSR payload")
    (ndim,) = struct.unpack_from("<I", data, 4)
    want_header = 8 + 4 * ndim
    if len(data) < want_header:
        raise FormatError("TNSR header truncated")
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    numel = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    if len(data) != want_header + 4 * numel:
        raise FormatError(
            f"TNSR payload length {len(data) - want_header} does not match dims {dims}"
        )
    return np.frombuffer(data, dtype="<f4", offset=want_header).reshape(dims).copy()
