"""Masked CP completion by plain alternating least squares (the WCP
baseline): minimize the squared misfit of the CP model on the observed
entries, one factor matrix at a time.

Each mode update solves an independent least-squares problem per row,
restricted to that row's observed columns; rows are solved min-norm so
the sweep stays well defined at any sampling ratio. The objective is
nonincreasing across sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solver import SolveResult
from .tensor import (
    COMPLEX,
    CPFactors,
    SamplingMask,
    apply_mask,
    cp_synthesize,
    khatri_rao_list,
    mode_n_unfold,
)


@dataclass
class WcpConfig:
    r_hat: int
    max_iter: int = 1000
    rel_obj_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.r_hat < 1:
            raise ValueError(f"r_hat must be >= 1, got {self.r_hat}")
        if self.rel_obj_tol <= 0:
            raise ValueError(
                f"rel_obj_tol must be positive, got {self.rel_obj_tol}"
            )
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class WcpIterationRecord:
    iteration: int
    objective: float
    rel_change: float


def _init_factors(dims, r_hat: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    factors = []
    for d in dims:
        g = (rng.standard_normal((d, r_hat))
             + 1j * rng.standard_normal((d, r_hat))) / math.sqrt(2.0)
        factors.append(g / math.sqrt(d))
    return factors


def update_mode(factors: list[np.ndarray], n: int,
                y_unfold: np.ndarray, row_cols: list[np.ndarray]) -> None:
    """Least-squares update of factor matrix n given all others.

    Row i minimizes the misfit against its observed columns of the mode-n
    unfolding; min-norm when underdetermined.
    """
    r = factors[0].shape[1]
    n_modes = len(factors)
    mats = [factors[m] for m in reversed(range(n_modes)) if m != n]
    kr = khatri_rao_list(mats, rank=r)
    u_new = np.zeros((factors[n].shape[0], r), dtype=COMPLEX)
    for i in range(u_new.shape[0]):
        cols = row_cols[i]
        if cols.size == 0:
            continue
        v, *_ = np.linalg.lstsq(kr[cols], y_unfold[i, cols], rcond=None)
        u_new[i] = v
    factors[n] = u_new


def wcp_solve(observed: np.ndarray, omega: SamplingMask,
              cfg: WcpConfig) -> SolveResult:
    observed = np.asarray(observed, dtype=COMPLEX)
    if observed.shape != omega.dims:
        raise ValueError(
            f"tensor dims {observed.shape} do not match mask dims {omega.dims}"
        )
    if omega.count == 0:
        raise ValueError("empty observation set")
    if not np.isfinite(observed).all():
        raise ValueError("non-finite entries in observed tensor")
    observed = apply_mask(observed, omega)
    dims = observed.shape
    n_modes = len(dims)

    y_unfold = [mode_n_unfold(observed, n) for n in range(n_modes)]
    row_cols = [
        [np.flatnonzero(row) for row in omega.matricized(n)]
        for n in range(n_modes)
    ]
    dense = omega.dense
    y_obs = observed[dense]

    def objective(factors):
        diff = y_obs - cp_synthesize(CPFactors(factors))[dense]
        return float(np.vdot(diff, diff).real)

    factors = _init_factors(dims, cfg.r_hat, cfg.seed)
    f_prev = objective(factors)
    history: list[WcpIterationRecord] = []
    converged = False
    iterations = 0
    for k in range(1, cfg.max_iter + 1):
        for n in range(n_modes):
            update_mode(factors, n, y_unfold[n], row_cols[n])
        f_curr = objective(factors)
        rel = abs(f_prev - f_curr) / (1.0 + f_prev)
        history.append(WcpIterationRecord(k, f_curr, rel))
        iterations = k
        f_prev = f_curr
        if rel <= cfg.rel_obj_tol:
            converged = True
            break

    cp = CPFactors([f.copy() for f in factors])
    return SolveResult(
        factors=cp,
        reconstruction=cp_synthesize(cp),
        history=history,
        iterations=iterations,
        converged=converged,
    )
