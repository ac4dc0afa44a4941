"""Hankel embedding of vectors and the associated adjoint machinery.

The embedding maps a length-I vector to an s1 x s2 matrix constant along
anti-diagonals, entry (i, j) = x[i + j], with s1 + s2 - 1 = I. Composing
the embedding with its adjoint is diagonal: it scales entry k of the
vector by the number of matrix cells on anti-diagonal k.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .tensor import COMPLEX


@dataclass(frozen=True)
class HankelShape:
    """Target matrix shape (s1, s2) for embedding a vector of length
    s1 + s2 - 1."""

    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 < 1 or self.s2 < 1:
            raise ValueError(f"invalid Hankel shape ({self.s1}, {self.s2})")

    @property
    def length(self) -> int:
        return self.s1 + self.s2 - 1

    @classmethod
    def near_square(cls, length: int) -> "HankelShape":
        """Square or nearly square split: s1 = ceil((I+1)/2)."""
        if length < 1:
            raise ValueError(f"invalid vector length {length}")
        s1 = (length + 2) // 2
        return cls(s1, length + 1 - s1)


@lru_cache(maxsize=256)
def _antidiag_index(s1: int, s2: int) -> np.ndarray:
    return np.add.outer(np.arange(s1), np.arange(s2))


def hankel_embed(x: np.ndarray, shape: HankelShape) -> np.ndarray:
    x = np.asarray(x, dtype=COMPLEX).reshape(-1)
    if x.size != shape.length:
        raise ValueError(
            f"vector length {x.size} incompatible with shape "
            f"({shape.s1}, {shape.s2})"
        )
    return scipy.linalg.hankel(x[: shape.s1], x[shape.s1 - 1 :])


def hankel_adjoint(m: np.ndarray) -> np.ndarray:
    """Sum the matrix entries along each anti-diagonal."""
    m = np.asarray(m, dtype=COMPLEX)
    s1, s2 = m.shape
    out = np.zeros(s1 + s2 - 1, dtype=COMPLEX)
    np.add.at(out, _antidiag_index(s1, s2).ravel(), m.ravel())
    return out


def antidiagonal_weights(shape: HankelShape) -> np.ndarray:
    """Number of cells on each anti-diagonal of an s1 x s2 matrix."""
    k = np.arange(shape.length)
    return np.minimum(
        np.minimum(k + 1, shape.length - k),
        min(shape.s1, shape.s2),
    ).astype(float)


def hankel_operator_matrix(shape: HankelShape) -> np.ndarray:
    """Dense matrix form of the embedding, acting on vectors and producing
    row-major vectorized matrices. Used mainly for cross-checks."""
    idx = _antidiag_index(shape.s1, shape.s2).ravel()
    op = np.zeros((shape.s1 * shape.s2, shape.length))
    op[np.arange(idx.size), idx] = 1.0
    return op


def column_extract(m: np.ndarray, r: int) -> np.ndarray:
    m = np.asarray(m)
    if not 0 <= r < m.shape[1]:
        raise ValueError(f"column {r} out of range for shape {m.shape}")
    return m[:, r].copy()


def column_embed(v: np.ndarray, r: int, ncols: int) -> np.ndarray:
    """Adjoint of extraction: place v in column r of a zero matrix."""
    v = np.asarray(v, dtype=COMPLEX).reshape(-1)
    if not 0 <= r < ncols:
        raise ValueError(f"column {r} out of range for {ncols} columns")
    out = np.zeros((v.size, ncols), dtype=COMPLEX)
    out[:, r] = v
    return out


def combined_weight_matrix(length: int, rank: int, shape: HankelShape) -> np.ndarray:
    """Matrix C with every column equal to the anti-diagonal weights, so
    that summing column-embed(adjoint(embed(column r))) over all columns
    of an (length x rank) matrix equals the Hadamard product C * X."""
    if shape.length != length:
        raise ValueError(
            f"shape ({shape.s1}, {shape.s2}) incompatible with length {length}"
        )
    w = antidiagonal_weights(shape)
    return np.repeat(w[:, None], rank, axis=1)
