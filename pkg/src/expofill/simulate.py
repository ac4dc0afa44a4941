"""Ground-truth exponential signals, noise, normalization and sampling.

A signal is a superposition of R components; component r contributes
amplitude d_r times a product over modes of geometric progressions
z**0, z**1, ... with per-mode pole z = exp(-1/tau + 2j*pi*f). Undamped
components use tau = inf.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .tensor import COMPLEX, CPFactors, SamplingMask


@dataclass(eq=False)
class ExponentialModel:
    """dims, complex amplitudes (R,), frequencies (R, N) in cycles/sample,
    dampings (R, N) in samples (inf means undamped)."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray
    freqs: np.ndarray
    taus: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.amplitudes = np.asarray(self.amplitudes, dtype=COMPLEX).reshape(-1)
        r = self.amplitudes.size
        n = len(self.dims)
        self.freqs = np.asarray(self.freqs, dtype=float).reshape(r, n)
        self.taus = np.asarray(self.taus, dtype=float).reshape(r, n)
        if ((self.freqs < 0) | (self.freqs >= 1)).any():
            raise ValueError("frequencies must lie in [0, 1)")
        if (self.taus <= 0).any():
            raise ValueError("dampings must be positive (inf for undamped)")

    @property
    def rank(self) -> int:
        return self.amplitudes.size

    @property
    def poles(self) -> np.ndarray:
        """Per-component per-mode pole z = exp(-1/tau + 2j*pi*f)."""
        return np.exp(-1.0 / self.taus + 2j * np.pi * self.freqs)


def random_model(dims, rank: int, damped: bool, seed: int) -> ExponentialModel:
    """Random instance: frequencies uniform on [0,1); amplitudes
    1 + 10**(0.5*m) with m uniform on [0,1]; dampings 10 + 30*g with g
    uniform on [0,1] when damped, inf otherwise."""
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    rng = np.random.default_rng(seed)
    m = rng.random(rank)
    amplitudes = (1.0 + 10.0 ** (0.5 * m)).astype(COMPLEX)
    freqs = rng.random((rank, n))
    if damped:
        taus = 10.0 + 30.0 * rng.random((rank, n))
    else:
        taus = np.full((rank, n), np.inf)
    return ExponentialModel(dims, amplitudes, freqs, taus)


def vandermonde_factors(model: ExponentialModel) -> CPFactors:
    """Per-mode factor matrices with geometric columns z**0 .. z**(I-1),
    weighted by the amplitudes."""
    z = model.poles
    factors = []
    for n, d in enumerate(model.dims):
        powers = np.arange(d)[:, None]
        factors.append(z[:, n][None, :] ** powers)
    return CPFactors(factors, weights=model.amplitudes)


def synthesize(model: ExponentialModel) -> np.ndarray:
    """Evaluate the model on the grid by direct accumulation of the R
    rank-1 components."""
    z = model.poles
    out = np.zeros(model.dims, dtype=COMPLEX)
    for r in range(model.rank):
        comp = np.asarray(model.amplitudes[r])
        for n, d in enumerate(model.dims):
            vec = z[r, n] ** np.arange(d)
            comp = np.multiply.outer(comp, vec)
        out += comp
    return out


def normalize_max(x: np.ndarray):
    """Divide by the maximum entry magnitude; returns (tensor, divisor)."""
    x = np.asarray(x, dtype=COMPLEX)
    scale = float(np.abs(x).max())
    if scale == 0.0:
        raise ValueError("cannot normalize an all-zero tensor")
    return x / scale, scale


def add_noise(x: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """Add independent N(0, sigma^2) to real and imaginary parts."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    x = np.asarray(x, dtype=COMPLEX)
    if sigma == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    re = rng.standard_normal(x.shape)
    im = rng.standard_normal(x.shape)
    return x + sigma * (re + 1j * im)


def sample_uniform(dims, sr: float, seed: int) -> SamplingMask:
    """floor(sr * prod(dims)) distinct grid points, uniform without
    replacement."""
    dims = tuple(int(d) for d in dims)
    if not 0 < sr <= 1:
        raise ValueError(f"sampling ratio must lie in (0, 1], got {sr}")
    total = int(np.prod(dims, dtype=np.int64))
    count = int(math.floor(sr * total))
    if count < 1:
        raise ValueError(
            f"sampling ratio {sr} selects no entries of a {total}-cell grid"
        )
    rng = np.random.default_rng(seed)
    flat = rng.choice(total, size=count, replace=False)
    idx = np.stack(np.unravel_index(np.sort(flat), dims, order="F"), axis=1)
    return SamplingMask(dims, idx)


def drop_slices(dims, mode: int, fraction: float, seed: int) -> SamplingMask:
    """Observe everything except floor(fraction * I_mode) whole slices
    along the given mode, chosen uniformly."""
    dims = tuple(int(d) for d in dims)
    if not 0 <= mode < len(dims):
        raise ValueError(f"mode {mode} out of range for dims {dims}")
    if not 0 <= fraction < 1:
        raise ValueError(f"fraction must lie in [0, 1), got {fraction}")
    n_drop = int(math.floor(fraction * dims[mode]))
    dense = np.ones(dims, dtype=bool)
    if n_drop:
        rng = np.random.default_rng(seed)
        dropped = rng.choice(dims[mode], size=n_drop, replace=False)
        np.moveaxis(dense, mode, 0)[dropped] = False
    return SamplingMask.from_dense(dense)


def model_to_dict(model: ExponentialModel) -> dict:
    comps = []
    for r in range(model.rank):
        comps.append({
            "amplitude_re": float(model.amplitudes[r].real),
            "amplitude_im": float(model.amplitudes[r].imag),
            "freqs": [float(v) for v in model.freqs[r]],
            "taus": [None if math.isinf(v) else float(v)
                     for v in model.taus[r]],
        })
    return {"dims": list(model.dims), "components": comps}


def model_from_dict(doc: dict) -> ExponentialModel:
    dims = tuple(int(d) for d in doc["dims"])
    comps = doc["components"]
    amplitudes = np.array(
        [c["amplitude_re"] + 1j * c["amplitude_im"] for c in comps],
        dtype=COMPLEX,
    )
    freqs = np.array([c["freqs"] for c in comps], dtype=float)
    taus = np.array(
        [[math.inf if v is None else float(v) for v in c["taus"]]
         for c in comps],
        dtype=float,
    )
    return ExponentialModel(dims, amplitudes, freqs, taus)


def save_model(path, model: ExponentialModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> ExponentialModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
