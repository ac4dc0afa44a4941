"""Built-in property battery behind the ``selftest`` CLI subcommand.

Each check prints one PASS/FAIL line; the runner returns a nonzero code
if anything failed. These are quick smoke-level versions of the full
pytest suite.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from . import fileio, svt
from .hankel import (
    HankelShape,
    antidiagonal_weights,
    column_embed,
    column_extract,
    combined_weight_matrix,
    hankel_adjoint,
    hankel_embed,
)
from .tensor import (
    CPFactors,
    SamplingMask,
    apply_mask,
    cp_synthesize,
    khatri_rao_list,
    mode_n_fold,
    mode_n_unfold,
)


def _rand_c(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def check_hankel_adjoint(rng) -> bool:
    for _ in range(100):
        length = int(rng.integers(2, 20))
        shape = HankelShape.near_square(length)
        x = _rand_c(rng, length)
        m = _rand_c(rng, shape.s1, shape.s2)
        lhs = np.vdot(m, hankel_embed(x, shape))
        rhs = np.vdot(hankel_adjoint(m), x)
        if abs(lhs - rhs) > 1e-12 * max(abs(lhs), 1.0):
            return False
    return True


def check_column_adjoint(rng) -> bool:
    for _ in range(100):
        n1 = int(rng.integers(1, 10))
        n2 = int(rng.integers(1, 10))
        r = int(rng.integers(0, n2))
        m = _rand_c(rng, n1, n2)
        v = _rand_c(rng, n1)
        lhs = np.vdot(v, column_extract(m, r))
        rhs = np.vdot(column_embed(v, r, n2), m)
        if abs(lhs - rhs) > 1e-12 * max(abs(lhs), 1.0):
            return False
    return True


def check_diagonal_composition(rng) -> bool:
    for _ in range(20):
        length = int(rng.integers(2, 16))
        s1 = int(rng.integers(1, length + 1))
        shape = HankelShape(s1, length + 1 - s1)
        w = antidiagonal_weights(shape)
        x = _rand_c(rng, length)
        if not np.allclose(hankel_adjoint(hankel_embed(x, shape)), w * x,
                           rtol=0, atol=1e-12 * np.abs(w * x).max()):
            return False
        r = int(rng.integers(1, 6))
        c = combined_weight_matrix(length, r, shape)
        xm = _rand_c(rng, length, r)
        acc = np.zeros_like(xm)
        for j in range(r):
            acc += column_embed(
                hankel_adjoint(hankel_embed(column_extract(xm, j), shape)),
                j, r)
        if not np.allclose(acc, c * xm, rtol=0,
                           atol=1e-12 * np.abs(c * xm).max()):
            return False
    return True


def check_fold_roundtrip(rng) -> bool:
    dims = (3, 4, 5)
    x = _rand_c(rng, *dims)
    for n in range(3):
        if not np.array_equal(mode_n_fold(mode_n_unfold(x, n), dims, n), x):
            return False
    return True


def check_unfold_khatri_rao(rng) -> bool:
    dims = (4, 3, 5)
    r = 3
    factors = [_rand_c(rng, d, r) for d in dims]
    x = cp_synthesize(CPFactors(factors))
    for n in range(3):
        mats = [factors[m] for m in reversed(range(3)) if m != n]
        pred = factors[n] @ khatri_rao_list(mats, rank=r).T
        got = mode_n_unfold(x, n)
        if np.abs(pred - got).max() > 1e-12 * np.abs(got).max():
            return False
    return True


def check_mask_energy(rng) -> bool:
    dims = (5, 4, 3)
    x = _rand_c(rng, *dims)
    flat = rng.permutation(60)[:25]
    omega = SamplingMask(
        dims, np.stack(np.unravel_index(flat, dims, order="F"), axis=1))
    a = np.linalg.norm(apply_mask(x, omega)) ** 2
    b = np.linalg.norm(apply_mask(x, omega.complement())) ** 2
    c = np.linalg.norm(x) ** 2
    return abs(a + b - c) <= 1e-12 * c


def check_svt(rng) -> bool:
    for _ in range(10):
        m = _rand_c(rng, 5, 4)
        tau = 0.3
        z = svt.soft_threshold_singular(m, tau)
        obj0 = tau * svt.nuclear_norm(z) + 0.5 * np.linalg.norm(z - m) ** 2
        for _ in range(100):
            probe = z + 0.1 * _rand_c(rng, 5, 4)
            obj = (tau * svt.nuclear_norm(probe)
                   + 0.5 * np.linalg.norm(probe - m) ** 2)
            if obj < obj0 - 1e-12:
                return False
        a, b = _rand_c(rng, 5, 4), _rand_c(rng, 5, 4)
        lhs = np.linalg.norm(svt.soft_threshold_singular(a, tau)
                             - svt.soft_threshold_singular(b, tau))
        if lhs > np.linalg.norm(a - b) * (1 + 1e-12):
            return False
    return True


def check_tensor_file_roundtrip(rng) -> bool:
    x = _rand_c(rng, 3, 4, 2)
    omega = SamplingMask(
        (3, 4, 2),
        np.stack(np.unravel_index(rng.permutation(24)[:10], (3, 4, 2),
                                  order="F"), axis=1))
    with tempfile.TemporaryDirectory() as td:
        tp = os.path.join(td, "x.cten")
        mp = os.path.join(td, "m.cmsk")
        fileio.write_tensor(tp, x)
        fileio.write_mask(mp, omega)
        x2 = fileio.read_tensor(tp)
        m2 = fileio.read_mask(mp)
    return np.array_equal(x, x2) and np.array_equal(
        omega.indices, m2.indices)


def check_exponential_rank1(rng) -> bool:
    z = np.exp(-0.05 + 2j * np.pi * 0.31)
    vec = z ** np.arange(15)
    h = hankel_embed(vec, HankelShape.near_square(15))
    s = np.linalg.svd(h, compute_uv=False)
    return s[1] <= 1e-10 * s[0]


CHECKS = [
    ("hankel adjoint identity", check_hankel_adjoint),
    ("column extract/embed adjoint identity", check_column_adjoint),
    ("diagonal composition identities", check_diagonal_composition),
    ("unfold/fold roundtrip", check_fold_roundtrip),
    ("unfold Khatri-Rao consistency", check_unfold_khatri_rao),
    ("mask energy partition", check_mask_energy),
    ("singular-value shrinkage prox", check_svt),
    ("tensor/mask file roundtrip", check_tensor_file_roundtrip),
    ("exponential Hankel rank-1", check_exponential_rank1),
]


def run_selftest() -> int:
    rng = np.random.default_rng(20240814)
    failed = 0
    for name, fn in CHECKS:
        ok = fn(rng)
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failed += 0 if ok else 1
    print(f"{len(CHECKS) - failed}/{len(CHECKS)} checks passed")
    return 1 if failed else 0
