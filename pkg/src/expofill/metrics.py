"""Evaluation of reconstructions: normalized error, component recovery,
frequency estimation and Monte Carlo aggregation."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .tensor import CPFactors, frobenius_norm


@dataclass
class MetricsRecord:
    """One trial's scores. success and freq_rmse are optional."""

    rlne: float
    clipped_rlne: float
    success: bool | None = None
    freq_rmse: float | None = None
    wall_time: float = 0.0


def make_record(rlne_value: float, success: bool | None = None,
                freq_rmse_value: float | None = None,
                wall_time: float = 0.0) -> MetricsRecord:
    return MetricsRecord(
        rlne=rlne_value,
        clipped_rlne=min(rlne_value, 1.0),
        success=success,
        freq_rmse=freq_rmse_value,
        wall_time=wall_time,
    )


def rlne(x: np.ndarray, y: np.ndarray) -> float:
    """||x - y||_F / ||y||_F against the reference y."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    denom = frobenius_norm(y)
    if denom == 0.0:
        raise ValueError("zero reference tensor")
    return frobenius_norm(x - y) / denom


def _cosine_scores(true_factors: CPFactors,
                   est_factors: CPFactors) -> np.ndarray:
    """score[r, s]: product over modes of |<a_r, b_s>| / (|a_r| |b_s|)."""
    scores = np.ones((true_factors.rank, est_factors.rank))
    for a, b in zip(true_factors.factors, est_factors.factors):
        na = np.linalg.norm(a, axis=0)
        nb = np.linalg.norm(b, axis=0)
        inner = np.abs(a.conj().T @ b)
        denom = np.outer(na, nb)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = np.where(denom > 0, inner / denom, 0.0)
        scores *= cos
    return scores


def factor_success(true_factors: CPFactors, est_factors: CPFactors,
                   threshold: float | None = None) -> bool:
    """Greedy best-first matching of true components to estimated columns
    by the product-of-cosines score; success iff every matched score
    clears the threshold (default 0.99 per mode)."""
    if true_factors.n_modes != est_factors.n_modes:
        raise ValueError(
            f"mode count mismatch: {true_factors.n_modes} vs "
            f"{est_factors.n_modes}"
        )
    if est_factors.rank < true_factors.rank:
        raise ValueError(
            f"estimated rank {est_factors.rank} cannot cover "
            f"{true_factors.rank} true components"
        )
    if threshold is None:
        threshold = 0.99 ** true_factors.n_modes
    scores = _cosine_scores(true_factors, est_factors)
    for _ in range(true_factors.rank):
        r, s = np.unravel_index(np.argmax(scores), scores.shape)
        if not scores[r, s] > threshold:
            return False
        scores[r, :] = -1.0
        scores[:, s] = -1.0
    return True


def wrap_distance(a, b):
    """Circular distance on the unit frequency interval."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
    return np.minimum(d, 1.0 - d)


@dataclass
class PeakEstimates:
    """Estimated peak frequencies (found x N) plus a flag set when fewer
    peaks than requested could be located."""

    frequencies: np.ndarray
    short_count: bool


def estimate_frequencies(x: np.ndarray, n_peaks: int,
                         zero_pad: int = 4) -> PeakEstimates:
    """Locate the n_peaks largest strict local maxima of the zero-padded
    magnitude spectrum and refine each coordinate by per-axis parabolic
    interpolation of the log magnitude.

    The neighborhood is the full 3^N - 1 surround with wrap-around;
    returned frequencies lie in [0, 1)^N.
    """
    x = np.asarray(x)
    if n_peaks < 1:
        raise ValueError(f"n_peaks must be >= 1, got {n_peaks}")
    if zero_pad < 1:
        raise ValueError(f"zero_pad must be >= 1, got {zero_pad}")
    ndim = x.ndim
    padded = tuple(zero_pad * d for d in x.shape)
    mag = np.abs(np.fft.fftn(x, s=padded))

    is_max = np.ones(mag.shape, dtype=bool)
    axes = tuple(range(ndim))
    for offset in itertools.product((-1, 0, 1), repeat=ndim):
        if all(o == 0 for o in offset):
            continue
        is_max &= mag > np.roll(mag, offset, axis=axes)
    coords = np.argwhere(is_max)
    if coords.shape[0] == 0:
        return PeakEstimates(np.zeros((0, ndim)), True)
    values = mag[tuple(coords.T)]
    order = np.argsort(values)[::-1][:n_peaks]
    coords = coords[order]

    tiny = np.finfo(float).tiny
    freqs = np.empty((coords.shape[0], ndim))
    for p, k in enumerate(coords):
        for axis in range(ndim):
            npad = padded[axis]
            km = list(k); km[axis] = (k[axis] - 1) % npad
            kp = list(k); kp[axis] = (k[axis] + 1) % npad
            lm = math.log(max(mag[tuple(km)], tiny))
            l0 = math.log(max(mag[tuple(k)], tiny))
            lp = math.log(max(mag[tuple(kp)], tiny))
            denom = lm - 2.0 * l0 + lp
            if denom < 0 and math.isfinite(denom):
                delta = 0.5 * (lm - lp) / denom
                delta = min(max(delta, -0.5), 0.5)
            else:
                delta = 0.0
            freqs[p, axis] = ((k[axis] + delta) % npad) / npad
    return PeakEstimates(freqs, coords.shape[0] < n_peaks)


def freq_rmse(true_f, est_f) -> float:
    """Root-mean-square frequency error after greedy circular matching.

    Squared per-mode wrap-around differences are accumulated over all
    modes and components, normalized by the component count.
    """
    true_f = np.atleast_2d(np.asarray(true_f, dtype=float))
    est_f = np.atleast_2d(np.asarray(est_f, dtype=float))
    if true_f.shape != est_f.shape:
        raise ValueError(
            f"frequency list shapes differ: {true_f.shape} vs {est_f.shape}"
        )
    r = true_f.shape[0]
    dist2 = np.zeros((r, r))
    for n in range(true_f.shape[1]):
        dist2 += wrap_distance(true_f[:, n][:, None],
                               est_f[:, n][None, :]) ** 2
    total = 0.0
    for _ in range(r):
        i, j = np.unravel_index(np.argmin(dist2), dist2.shape)
        total += dist2[i, j]
        dist2[i, :] = np.inf
        dist2[:, j] = np.inf
    return math.sqrt(total / r)


@dataclass
class Aggregate:
    """Monte Carlo summary over a cell's trials."""

    trials: int
    mean_clipped_rlne: float
    std_clipped_rlne: float
    mean_rlne: float
    success_rate: float | None
    mean_freq_rmse: float | None


def monte_carlo_average(records: list[MetricsRecord]) -> Aggregate:
    if not records:
        raise ValueError("no records to aggregate")
    clipped = np.array([r.clipped_rlne for r in records])
    raw = np.array([r.rlne for r in records])
    succ = [r.success for r in records if r.success is not None]
    rmse = [r.freq_rmse for r in records if r.freq_rmse is not None]
    return Aggregate(
        trials=len(records),
        mean_clipped_rlne=float(clipped.mean()),
        std_clipped_rlne=float(clipped.std()),
        mean_rlne=float(raw.mean()),
        success_rate=(sum(succ) / len(succ)) if succ else None,
        mean_freq_rmse=(float(np.mean(rmse)) if rmse else None),
    )
