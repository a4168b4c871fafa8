"""Weight storage and the IMPW on-disk format.

IMPW layout (little-endian): magic "IMPW", version u32 = 1, tensor
count u32; per tensor: name length u16 + UTF-8 name, ndim u8,
dims u32 x ndim, raw float32 payload; trailing CRC32 of all preceding
bytes. Tensors are written sorted by name so a store always serializes
to the same bytes.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import FormatError, ShapeMismatchError, TruncatedFileError
from .network import NetworkSpec

MAGIC = b"IMPW"
VERSION = 1


class WeightStore:
    """Immutable mapping from parameterized layer name to (kernel, bias).

    Entries are float32 and write-protected after construction; safe for
    concurrent readers.
    """

    def __init__(self, tensors: dict[str, np.ndarray]):
        self._tensors: dict[str, np.ndarray] = {}
        for name, arr in tensors.items():
            a = np.ascontiguousarray(arr, dtype=np.float32)
            a.setflags(write=False)
            self._tensors[name] = a

    def kernel(self, layer: str) -> np.ndarray:
        return self._entry(layer, "kernel")

    def bias(self, layer: str) -> np.ndarray:
        return self._entry(layer, "bias")

    def _entry(self, layer: str, part: str) -> np.ndarray:
        key = f"{layer}.{part}"
        if key not in self._tensors:
            raise ShapeMismatchError(f"weight store is missing {key}")
        return self._tensors[key]

    @property
    def tensors(self) -> dict[str, np.ndarray]:
        return dict(self._tensors)

    def checksum(self) -> str:
        """Content hash used as a trace-cache key component."""
        h = hashlib.sha1()
        for name in sorted(self._tensors):
            h.update(name.encode())
            h.update(self._tensors[name].tobytes())
        return h.hexdigest()

    def validate(self, spec: NetworkSpec) -> None:
        """Check every parameterized layer has a kernel/bias of the
        declared shape; names the first offending layer."""
        for layer in spec.parameterized_layers:
            for part, want in (("kernel", layer.kernel_shape), ("bias", layer.bias_shape)):
                key = f"{layer.name}.{part}"
                if key not in self._tensors:
                    raise ShapeMismatchError(f"weights missing entry for {layer.name}")
                got = self._tensors[key].shape
                if got != want:
                    raise ShapeMismatchError(
                        f"{key}: file has shape {got}, network declares {want}"
                    )


def init_random_weights(spec: NetworkSpec, seed: int) -> WeightStore:
    """Deterministic uniform init in [-s, s], s = 1/sqrt(fan_in)."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for layer in spec.parameterized_layers:
        if layer.kind == "conv":
            fan_in = layer.kernel_shape[1] * 9
        else:
            fan_in = layer.kernel_shape[1]
        s = 1.0 / np.sqrt(fan_in)
        tensors[f"{layer.name}.kernel"] = rng.uniform(
            -s, s, layer.kernel_shape
        ).astype(np.float32)
        tensors[f"{layer.name}.bias"] = rng.uniform(-s, s, layer.bias_shape).astype(
            np.float32
        )
    return WeightStore(tensors)


def save_weights(store: WeightStore, path) -> None:
    body = bytearray()
    body += MAGIC
    tensors = store.tensors
    body += struct.pack("<II", VERSION, len(tensors))
    for name in sorted(tensors):
        arr = tensors[name]
        raw = name.encode("utf-8")
        body += struct.pack("<H", len(raw)) + raw
        body += struct.pack("<B", arr.ndim)
        body += struct.pack(f"<{arr.ndim}I", *arr.shape)
        body += arr.astype("<f4", copy=False).tobytes()
    body += struct.pack("<I", zlib.crc32(bytes(body)) & 0xFFFFFFFF)
    Path(path).write_bytes(bytes(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedFileError(
                f"file truncated: wanted {n} bytes at offset {self.pos}, "
                f"have {len(self.data) - self.pos}"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk


def load_weights(path, spec: NetworkSpec | None = None) -> WeightStore:
    """Read an IMPW file. Shapes are validated against ``spec`` when one
    is given (callers loading for inference should pass their spec)."""
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise FormatError(f"{path}: bad magic, not an IMPW weight file")
    version, count = struct.unpack("<II", r.take(8))
    if version != VERSION:
        raise FormatError(f"{path}: unsupported IMPW version {version}")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", r.take(2))
        try:
            name = r.take(name_len).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"{path}: undecodable tensor name at offset {r.pos}") from exc
        (ndim,) = struct.unpack("<B", r.take(1))
        dims = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
        numel = int(np.prod(dims, dtype=np.int64)) if ndim else 1
        payload = r.take(4 * numel)
        tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    (crc_stored,) = struct.unpack("<I", r.take(4))
    if r.pos != len(data):
        raise FormatError(f"{path}: {len(data) - r.pos} trailing bytes after CRC")
    crc_actual = zlib.crc32(data[:-4]) & 0xFFFFFFFF
    if crc_stored != crc_actual:
        raise FormatError(
            f"{path}: CRC mismatch (stored {crc_stored:#010x}, computed {crc_actual:#010x})"
        )
    store = WeightStore(tensors)
    if spec is not None:
        store.validate(spec)
    return store
