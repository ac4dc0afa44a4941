"""Binary file formats for tensors and sampling masks.

CTEN1 tensor files: magic ``CTEN1\\0``, u32 N, N x u64 dims, then
prod(dims) interleaved (real, imag) little-endian float64 values in
canonical order (first index fastest).

CMSK1 mask files: magic ``CMSK1\\0``, u32 N, N x u64 dims, u64 count,
then count x N u64 multi-indices (zero-based, sorted by canonical flat
position).

All integers are little-endian.
"""

from __future__ import annotations

import numpy as np

from .tensor import COMPLEX, SamplingMask

TENSOR_MAGIC = b"CTEN1\x00"
MASK_MAGIC = b"CMSK1\x00"

_U32 = np.dtype("<u4")
_U64 = np.dtype("<u8")
_F64 = np.dtype("<f8")


def _read_exact(fh, nbytes: int, what: str) -> bytes:
    buf = fh.read(nbytes)
    if len(buf) != nbytes:
        raise ValueError(f"truncated file while reading {what}")
    return buf


def write_tensor(path, x: np.ndarray) -> None:
    x = np.asarray(x, dtype=COMPLEX)
    flat = x.ravel(order="F")
    inter = np.empty(2 * flat.size, dtype=_F64)
    inter[0::2] = flat.real
    inter[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(np.asarray([x.ndim], dtype=_U32).tobytes())
        fh.write(np.asarray(x.shape, dtype=_U64).tobytes())
        fh.write(inter.tobytes())


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(TENSOR_MAGIC), "magic")
        if magic != TENSOR_MAGIC:
            raise ValueError(f"not a CTEN1 file: bad magic {magic!r}")
        n = int(np.frombuffer(_read_exact(fh, 4, "order"), dtype=_U32)[0])
        if n < 1:
            raise ValueError(f"invalid tensor order {n}")
        dims = np.frombuffer(_read_exact(fh, 8 * n, "dims"), dtype=_U64)
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims):
            raise ValueError(f"invalid dims {dims}")
        total = int(np.prod(dims, dtype=np.int64))
        raw = np.frombuffer(
            _read_exact(fh, 16 * total, "tensor data"), dtype=_F64
        )
        if fh.read(1):
            raise ValueError("trailing bytes after CTEN1 payload")
    data = raw[0::2] + 1j * raw[1::2]
    return data.reshape(dims, order="F")


def write_mask(path, omega: SamplingMask) -> None:
    with open(path, "wb") as fh:
        fh.write(MASK_MAGIC)
        fh.write(np.asarray([len(omega.dims)], dtype=_U32).tobytes())
        fh.write(np.asarray(omega.dims, dtype=_U64).tobytes())
        fh.write(np.asarray([omega.count], dtype=_U64).tobytes())
        fh.write(omega.indices.astype(_U64).tobytes())


def read_mask(path) -> SamplingMask:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, len(MASK_MAGIC), "magic")
        if magic != MASK_MAGIC:
            raise ValueError(f"not a CMSK1 file: bad magic {magic!r}")
        n = int(np.frombuffer(_read_exact(fh, 4, "order"), dtype=_U32)[0])
        if n < 1:
            raise ValueError(f"invalid mask order {n}")
        dims = np.frombuffer(_read_exact(fh, 8 * n, "dims"), dtype=_U64)
        dims = tuple(int(d) for d in dims)
        count = int(np.frombuffer(_read_exact(fh, 8, "count"), dtype=_U64)[0])
        idx = np.frombuffer(
            _read_exact(fh, 8 * n * count, "indices"), dtype=_U64
        ).reshape(count, n)
        if fh.read(1):
            raise ValueError("trailing bytes after CMSK1 payload")
    return SamplingMask(dims, idx.astype(np.int64))
