"""Complex thin SVD and the singular-value soft-thresholding prox."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import COMPLEX


@dataclass
class SvdResult:
    """Thin SVD: ``u @ diag(sigma) @ v.conj().T`` reconstructs the input.

    ``sigma`` is real, nonnegative, nonincreasing; u and v have
    orthonormal columns.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def complex_svd(m: np.ndarray) -> SvdResult:
    m = np.asarray(m, dtype=COMPLEX)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("non-finite entries in SVD input")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return SvdResult(u=u, sigma=s, v=vh.conj().T)


def soft_threshold_singular(m: np.ndarray, tau: float) -> np.ndarray:
    """Shrink all singular values of ``m`` by ``tau``, clipping at zero.

    This is the proximal operator of ``tau * ||.||_*`` at ``m``: the
    unique minimizer of tau*||Z||_* + 0.5*||Z - m||_F^2.
    """
    if tau <= 0:
        raise ValueError(f"threshold must be positive, got {tau}")
    res = complex_svd(m)
    s = np.maximum(res.sigma - tau, 0.0)
    return (res.u * s[None, :]) @ res.v.conj().T


def nuclear_norm(m: np.ndarray) -> float:
    return float(np.linalg.svd(np.asarray(m, dtype=COMPLEX),
                               compute_uv=False).sum())
