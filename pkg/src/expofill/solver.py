"""ADMM solver for Hankel-nuclear-norm regularized CP tensor completion.

The unknown tensor is represented by per-mode factor matrices. Each
iteration sweeps the factor matrices in ascending mode order (each mode's
update is a closed-form row-wise linear solve), soft-thresholds the
singular values of every per-column Hankel embedding against auxiliary
matrices Z, performs the dual ascent on the multipliers D, and grows the
penalty beta geometrically. The loop stops when the relative change of
the reconstruction falls below ``tol`` or ``max_iter`` is reached.

Everything is sequential and deterministic: identical inputs, seed and
config produce bit-identical results. The Z updates within an iteration
are mutually independent (as are the per-row factor solves within one
mode), so callers may parallelize them externally, but this module never
does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .hankel import HankelShape, hankel_adjoint, hankel_embed
from .tensor import (
    COMPLEX,
    CPFactors,
    SamplingMask,
    apply_mask,
    cp_synthesize,
    frobenius_norm,
    khatri_rao_list,
    mode_n_unfold,
)


@dataclass
class SolverConfig:
    """Hyperparameters of the ADMM solver.

    lam trades data consistency against the Hankel nuclear-norm penalty;
    beta0 and rho control the penalty schedule beta_k = beta0 * rho**k.
    """

    r_hat: int
    lam: float = 1e3
    beta0: float = 0.1
    rho: float = 1.05
    tol: float = 1e-4
    max_iter: int = 1000
    hankel_shapes: list[HankelShape] | None = None
    seed: int = 0
    track_multiplier_norms: bool = False

    def __post_init__(self):
        if self.r_hat < 1:
            raise ValueError(f"r_hat must be >= 1, got {self.r_hat}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.beta0 <= 0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        if not 1.0 < self.rho <= 1.1:
            raise ValueError(f"rho must lie in (1.0, 1.1], got {self.rho}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass
class SolverState:
    """Live ADMM variables: factors U, auxiliaries Z, multipliers D."""

    factors: list[np.ndarray]
    z: list[list[np.ndarray]]
    d: list[list[np.ndarray]]
    beta: float
    iteration: int
    x_last: np.ndarray


@dataclass
class IterationRecord:
    iteration: int
    delta_x: float
    feasibility_gap: float
    lagrangian: float
    beta: float
    u_residual: float
    u_change_beta: float
    ridge_used: bool
    max_multiplier_norm: float | None = None


@dataclass
class SolveResult:
    factors: CPFactors
    reconstruction: np.ndarray
    history: list = field(repr=False)
    iterations: int
    converged: bool


def relative_change(x: np.ndarray, x_last: np.ndarray) -> float:
    """||x - x_last||_F / ||x_last||_F, +inf when the reference is zero."""
    denom = frobenius_norm(x_last)
    if denom == 0.0:
        return math.inf
    return frobenius_norm(np.asarray(x) - np.asarray(x_last)) / denom


def _synthesize(factors: list[np.ndarray]) -> np.ndarray:
    return cp_synthesize(CPFactors(factors))


class HmrtcSolver:
    """Owns one completion problem: observed entries, mask, and config.

    Exposes the individual update steps for diagnostics; ``run`` executes
    the full iteration loop.
    """

    def __init__(self, observed: np.ndarray, omega: SamplingMask,
                 cfg: SolverConfig):
        observed = np.asarray(observed, dtype=COMPLEX)
        if observed.shape != omega.dims:
            raise ValueError(
                f"tensor dims {observed.shape} do not match mask dims "
                f"{omega.dims}"
            )
        if omega.count == 0:
            raise ValueError("empty observation set")
        if not np.isfinite(observed).all():
            raise ValueError("non-finite entries in observed tensor")
        self.cfg = cfg
        self.dims = observed.shape
        self.n_modes = len(self.dims)
        self.omega = omega
        self.observed = apply_mask(observed, omega)

        if cfg.hankel_shapes is None:
            self.shapes = [HankelShape.near_square(d) for d in self.dims]
        else:
            self.shapes = list(cfg.hankel_shapes)
            if len(self.shapes) != self.n_modes:
                raise ValueError(
                    f"{len(self.shapes)} Hankel shapes for "
                    f"{self.n_modes} modes"
                )
            for d, s in zip(self.dims, self.shapes):
                if s.length != d:
                    raise ValueError(
                        f"Hankel shape ({s.s1}, {s.s2}) incompatible with "
                        f"mode length {d}"
                    )

        # Per-mode anti-diagonal weights and masked unfoldings; the
        # per-row observed column lists drive the row-wise solves.
        self.weights = [
            np.minimum(np.minimum(np.arange(d) + 1, d - np.arange(d)),
                       min(s.s1, s.s2)).astype(float)
            for d, s in zip(self.dims, self.shapes)
        ]
        self.y_unfold = [mode_n_unfold(self.observed, n)
                         for n in range(self.n_modes)]
        self.row_cols = [
            [np.flatnonzero(row) for row in omega.matricized(n)]
            for n in range(self.n_modes)
        ]
        self._mask_dense = omega.dense
        self._y_obs = self.observed[self._mask_dense]

    # ----- state construction -------------------------------------------

    def init_state(self, seed: int | None = None) -> SolverState:
        """Random factor init; Z matches the embeddings so the initial
        feasibility gap is zero; multipliers start at zero."""
        rng = np.random.default_rng(self.cfg.seed if seed is None else seed)
        r = self.cfg.r_hat
        factors = []
        for d in self.dims:
            g = (rng.standard_normal((d, r))
                 + 1j * rng.standard_normal((d, r))) / math.sqrt(2.0)
            factors.append(g / math.sqrt(d))
        z = [[hankel_embed(factors[n][:, j], self.shapes[n])
              for j in range(r)] for n in range(self.n_modes)]
        d_mul = [[np.zeros((self.shapes[n].s1, self.shapes[n].s2),
                           dtype=COMPLEX)
                  for _ in range(r)] for n in range(self.n_modes)]
        return SolverState(
            factors=factors, z=z, d=d_mul, beta=self.cfg.beta0,
            iteration=0, x_last=_synthesize(factors),
        )

    # ----- individual updates -------------------------------------------

    def _chain(self, factors: list[np.ndarray], n: int) -> np.ndarray:
        mats = [factors[m] for m in reversed(range(self.n_modes)) if m != n]
        return khatri_rao_list(mats, rank=self.cfg.r_hat)

    def update_factor(self, state: SolverState, n: int) -> tuple[float, bool]:
        """Closed-form row-wise update of factor matrix n.

        Each row solves an r_hat x r_hat Hermitian positive-definite
        system: lam * (masked Gram of the Khatri-Rao chain) plus
        beta * (anti-diagonal weight) on the diagonal. Returns the worst
        relative normal-equation residual over rows and whether a ridge
        fallback was needed.
        """
        cfg = self.cfg
        beta = state.beta
        kr = self._chain(state.factors, n)
        w = self.weights[n]
        r = cfg.r_hat

        rhs = cfg.lam * (self.y_unfold[n] @ kr.conj())
        for j in range(r):
            rhs[:, j] += hankel_adjoint(
                beta * state.z[n][j] - state.d[n][j]
            )

        u_new = np.empty((self.dims[n], r), dtype=COMPLEX)
        worst = 0.0
        ridge_used = False
        eye = np.eye(r)
        for i in range(self.dims[n]):
            cols = self.row_cols[n][i]
            if cols.size:
                kri = kr[cols]
                m = cfg.lam * (kri.T @ kri.conj()) + (beta * w[i]) * eye
            else:
                m = (beta * w[i]) * eye
            e = rhs[i]
            try:
                c = scipy.linalg.cho_factor(m, lower=True, check_finite=False)
                v = scipy.linalg.cho_solve(c, e.conj(),
                                           check_finite=False).conj()
            except scipy.linalg.LinAlgError:
                ridge_used = True
                m = m + (1e-12 * np.trace(m).real) * eye
                v = np.linalg.solve(m, e.conj()).conj()
            u_new[i] = v
            e_norm = np.linalg.norm(e)
            if e_norm > 0:
                worst = max(worst,
                            np.linalg.norm(v @ m - e) / e_norm)
        state.factors[n] = u_new
        return worst, ridge_used

    def z_input(self, state: SolverState, n: int, r: int) -> np.ndarray:
        """Embedding of the current factor column plus the scaled multiplier."""
        h = hankel_embed(state.factors[n][:, r], self.shapes[n])
        return h + state.d[n][r] / state.beta

    def update_z(self, state: SolverState, n: int, r: int) -> np.ndarray:
        """Singular-value shrinkage of the shifted embedding by 1/beta."""
        a = self.z_input(state, n, r)
        u, s, vh = np.linalg.svd(a, full_matrices=False)
        z = (u * np.maximum(s - 1.0 / state.beta, 0.0)[None, :]) @ vh
        state.z[n][r] = z
        return z

    def update_d(self, state: SolverState, n: int, r: int) -> np.ndarray:
        """Dual ascent on the multiplier for constraint (n, r)."""
        h = hankel_embed(state.factors[n][:, r], self.shapes[n])
        d = state.d[n][r] + state.beta * (h - state.z[n][r])
        state.d[n][r] = d
        return d

    # ----- objective ------------------------------------------------------

    def data_misfit(self, x: np.ndarray) -> float:
        """Squared Frobenius misfit on the observed entries."""
        diff = self._y_obs - x[self._mask_dense]
        return float(np.vdot(diff, diff).real)

    def lagrangian(self, state: SolverState) -> float:
        """Augmented Lagrangian at the current state and penalty.

        Inner products of multipliers with constraint residuals enter via
        their real part.
        """
        x = _synthesize(state.factors)
        val = 0.5 * self.cfg.lam * self.data_misfit(x)
        for n in range(self.n_modes):
            for j in range(self.cfg.r_hat):
                h = hankel_embed(state.factors[n][:, j], self.shapes[n])
                resid = h - state.z[n][j]
                val += float(np.vdot(state.d[n][j], resid).real)
                val += np.linalg.svd(state.z[n][j], compute_uv=False).sum()
                val += 0.5 * state.beta * float(np.vdot(resid, resid).real)
        return val

    # ----- full iteration --------------------------------------------------

    def step(self, state: SolverState) -> IterationRecord:
        """One full iteration: factor sweep, Z and D updates, beta growth."""
        cfg = self.cfg
        beta = state.beta
        old_factors = [f.copy() for f in state.factors]

        worst_residual = 0.0
        ridge_used = False
        for n in range(self.n_modes):
            res, ridge = self.update_factor(state, n)
            worst_residual = max(worst_residual, res)
            ridge_used = ridge_used or ridge

        feas = 0.0
        nuc_total = 0.0
        inner_total = 0.0
        penalty_total = 0.0
        max_mul = 0.0 if cfg.track_multiplier_norms else None
        for n in range(self.n_modes):
            for j in range(cfg.r_hat):
                h = hankel_embed(state.factors[n][:, j], self.shapes[n])
                a = h + state.d[n][j] / beta
                u, s, vh = np.linalg.svd(a, full_matrices=False)
                s_new = np.maximum(s - 1.0 / beta, 0.0)
                z = (u * s_new[None, :]) @ vh
                resid = h - z
                rn2 = float(np.vdot(resid, resid).real)
                feas = max(feas, math.sqrt(rn2))
                nuc_total += float(s_new.sum())
                inner_total += float(np.vdot(state.d[n][j], resid).real)
                penalty_total += 0.5 * beta * rn2
                state.z[n][j] = z
                state.d[n][j] = state.d[n][j] + beta * resid
                if max_mul is not None:
                    max_mul = max(max_mul, float(np.linalg.norm(
                        state.d[n][j], ord=2)))

        x = _synthesize(state.factors)
        lagr = (0.5 * cfg.lam * self.data_misfit(x)
                + inner_total + nuc_total + penalty_total)
        delta_x = relative_change(x, state.x_last)
        u_change = max(
            frobenius_norm(f_new - f_old)
            for f_new, f_old in zip(state.factors, old_factors)
        ) * beta

        state.x_last = x
        state.iteration += 1
        state.beta = cfg.beta0 * cfg.rho ** state.iteration
        return IterationRecord(
            iteration=state.iteration,
            delta_x=delta_x,
            feasibility_gap=feas,
            lagrangian=lagr,
            beta=beta,
            u_residual=worst_residual,
            u_change_beta=u_change,
            ridge_used=ridge_used,
            max_multiplier_norm=max_mul,
        )

    def run(self, state: SolverState | None = None) -> SolveResult:
        if state is None:
            state = self.init_state()
        history: list[IterationRecord] = []
        converged = False
        while state.iteration < self.cfg.max_iter:
            record = self.step(state)
            history.append(record)
            if record.delta_x < self.cfg.tol:
                converged = True
                break
        factors = CPFactors([f.copy() for f in state.factors])
        return SolveResult(
            factors=factors,
            reconstruction=cp_synthesize(factors),
            history=history,
            iterations=state.iteration,
            converged=converged,
        )


def solve(observed: np.ndarray, omega: SamplingMask,
          cfg: SolverConfig) -> SolveResult:
    """Run the full ADMM loop on one completion problem."""
    return HmrtcSolver(observed, omega, cfg).run()
