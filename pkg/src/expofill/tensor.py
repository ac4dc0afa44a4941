"""Dense complex N-way tensor arithmetic.

Tensors are plain ``numpy.ndarray`` objects with ``dtype=complex128``. The
canonical flat ordering used for files and flat mask indices is
first-index-fastest (Fortran order); unfolding/folding are pure index
permutations against that ordering, so masking commutes with matricization
exactly.
"""

from __future__ import annotations

from functools import cached_property, reduce

import numpy as np

COMPLEX = np.complex128


def as_complex_tensor(x) -> np.ndarray:
    """Coerce input to a complex128 ndarray (order-agnostic in memory)."""
    arr = np.asarray(x, dtype=COMPLEX)
    if arr.ndim < 1:
        arr = arr.reshape(1)
    return arr


def frobenius_norm(x) -> float:
    """Square root of the summed squared entry magnitudes."""
    return float(np.linalg.norm(np.asarray(x).ravel()))


def mode_n_unfold(x: np.ndarray, n: int) -> np.ndarray:
    """Mode-n matricization: rows indexed by mode n, remaining modes mixed
    into columns with the first remaining index varying fastest.

    Parameters
    ----------
    x : ndarray
        N-way tensor.
    n : int
        Zero-based mode index.
    """
    x = np.asarray(x)
    if not 0 <= n < x.ndim:
        raise ValueError(f"mode {n} out of range for order-{x.ndim} tensor")
    return np.reshape(np.moveaxis(x, n, 0), (x.shape[n], -1), order="F")


def mode_n_fold(m: np.ndarray, dims, n: int) -> np.ndarray:
    """Exact inverse of :func:`mode_n_unfold`."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= n < len(dims):
        raise ValueError(f"mode {n} out of range for dims {dims}")
    m = np.asarray(m)
    kn = int(np.prod([d for i, d in enumerate(dims) if i != n], dtype=np.int64))
    if m.shape != (dims[n], kn):
        raise ValueError(
            f"matrix shape {m.shape} incompatible with dims {dims} at mode {n}; "
            f"expected {(dims[n], kn)}"
        )
    moved = (dims[n],) + tuple(d for i, d in enumerate(dims) if i != n)
    return np.moveaxis(np.reshape(m, moved, order="F"), 0, n)


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Columnwise Kronecker product of ``a`` (p x n) and ``b`` (q x n).

    Column j is ``kron(a[:, j], b[:, j])`` with b's index varying fastest.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(
            f"column-count mismatch: {a.shape} vs {b.shape}"
        )
    p, n = a.shape
    q, _ = b.shape
    return (a[:, None, :] * b[None, :, :]).reshape(p * q, n)


def khatri_rao_list(mats, rank: int | None = None) -> np.ndarray:
    """Fold :func:`khatri_rao` over a list of matrices, left to right.

    An empty list yields the 1 x rank all-ones matrix (the neutral element
    for building unfoldings of 1-way tensors); ``rank`` is required then.
    """
    mats = list(mats)
    if not mats:
        if rank is None:
            raise ValueError("rank required for empty Khatri-Rao product")
        return np.ones((1, rank), dtype=COMPLEX)
    return reduce(khatri_rao, mats)


class CPFactors:
    """Per-mode factor matrices of a CP representation plus column weights.

    ``factors[n]`` has shape (I_n, R); all share the same column count.
    Weights default to all ones, in which case synthesis is the plain sum
    of R rank-1 outer products.
    """

    def __init__(self, factors, weights=None):
        self.factors = [np.asarray(f, dtype=COMPLEX) for f in factors]
        self.weights = weights
        if not self.factors:
            raise ValueError("at least one factor matrix required")
        if any(f.ndim != 2 for f in self.factors):
            raise ValueError("factor matrices must be 2-D")
        ranks = {f.shape[1] for f in self.factors}
        if len(ranks) != 1:
            raise ValueError(
                f"factor matrices must share one column count, got shapes "
                f"{[f.shape for f in self.factors]}"
            )
        r = ranks.pop()
        if r < 1:
            raise ValueError("rank must be >= 1")
        if self.weights is None:
            self.weights = np.ones(r, dtype=COMPLEX)
        else:
            self.weights = np.asarray(self.weights, dtype=COMPLEX).reshape(-1)
            if self.weights.shape != (r,):
                raise ValueError(
                    f"weights length {self.weights.shape[0]} != rank {r}"
                )

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]

    @property
    def n_modes(self) -> int:
        return len(self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    def __repr__(self):
        return f"CPFactors(dims={self.dims}, rank={self.rank})"


def cp_synthesize(f: CPFactors) -> np.ndarray:
    """Evaluate the CP representation into a dense tensor.

    Entry (i_1..i_N) is sum_r w_r * prod_n factors[n][i_n, r].
    """
    dims = f.dims
    chain = khatri_rao_list(list(reversed(f.factors[1:])), rank=f.rank)
    m = f.factors[0] @ (chain * f.weights[None, :]).T
    return mode_n_fold(m, dims, 0)


class SamplingMask:
    """Set of observed multi-indices of a tensor grid.

    Indices are zero-based, duplicate-free, and kept sorted by canonical
    flat position (first index fastest).
    """

    def __init__(self, dims, indices):
        self.dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in self.dims):
            raise ValueError(f"dims must be positive, got {self.dims}")
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            idx = idx.reshape(0, len(self.dims))
        if idx.ndim != 2 or idx.shape[1] != len(self.dims):
            raise ValueError(
                f"indices must be (count, {len(self.dims)}), got {idx.shape}"
            )
        if idx.size and (idx.min() < 0 or (idx >= np.array(self.dims)).any()):
            raise ValueError(f"indices out of range for dims {self.dims}")
        flat = np.ravel_multi_index(idx.T, self.dims, order="F")
        flat = np.unique(flat)
        self.indices = np.stack(
            np.unravel_index(flat, self.dims, order="F"), axis=1
        ).astype(np.int64)

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "SamplingMask":
        """Build from a boolean array over the grid."""
        dense = np.asarray(dense, dtype=bool)
        flat = np.flatnonzero(dense.ravel(order="F"))
        idx = np.stack(np.unravel_index(flat, dense.shape, order="F"), axis=1)
        return cls(dense.shape, idx)

    @classmethod
    def full(cls, dims) -> "SamplingMask":
        return cls.from_dense(np.ones(tuple(int(d) for d in dims), dtype=bool))

    @property
    def count(self) -> int:
        return self.indices.shape[0]

    @property
    def sampling_ratio(self) -> float:
        return self.count / int(np.prod(self.dims, dtype=np.int64))

    @cached_property
    def dense(self) -> np.ndarray:
        d = np.zeros(self.dims, dtype=bool)
        if self.count:
            d[tuple(self.indices.T)] = True
        return d

    @cached_property
    def flat_indices(self) -> np.ndarray:
        """Canonical (first-index-fastest) flat positions, sorted."""
        if not self.count:
            return np.zeros(0, dtype=np.int64)
        return np.ravel_multi_index(self.indices.T, self.dims, order="F")

    def complement(self) -> "SamplingMask":
        return SamplingMask.from_dense(~self.dense)

    def matricized(self, n: int) -> np.ndarray:
        """Boolean mode-n unfolding of the mask (commutes with unfolding)."""
        return mode_n_unfold(self.dense, n)

    def __repr__(self):
        return (
            f"SamplingMask(dims={self.dims}, count={self.count}, "
            f"sr={self.sampling_ratio:.4f})"
        )


def matricize_mask(omega: SamplingMask, n: int) -> np.ndarray:
    """Mode-n matricized view of the observation set, as a boolean matrix."""
    return omega.matricized(n)


def apply_mask(x: np.ndarray, omega: SamplingMask) -> np.ndarray:
    """Keep observed entries, zero everything else."""
    x = np.asarray(x)
    if x.shape != omega.dims:
        raise ValueError(
            f"tensor dims {x.shape} do not match mask dims {omega.dims}"
        )
    return np.where(omega.dense, x, 0)
