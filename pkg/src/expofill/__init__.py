"""Recovery of N-dimensional exponential signals from partial samples by
Hankel-nuclear-norm regularized low-CP-rank tensor completion."""

from .cp_als import WcpConfig, wcp_solve
from .hankel import HankelShape
from .metrics import estimate_frequencies, factor_success, freq_rmse, rlne
from .simulate import (
    ExponentialModel,
    add_noise,
    drop_slices,
    normalize_max,
    random_model,
    sample_uniform,
    synthesize,
)
from .solver import HmrtcSolver, SolveResult, SolverConfig, solve
from .tensor import (
    CPFactors,
    SamplingMask,
    apply_mask,
    cp_synthesize,
    frobenius_norm,
    khatri_rao,
    mode_n_fold,
    mode_n_unfold,
)

__version__ = "0.1.0"

__all__ = [
    "CPFactors",
    "ExponentialModel",
    "HankelShape",
    "HmrtcSolver",
    "SamplingMask",
    "SolveResult",
    "SolverConfig",
    "WcpConfig",
    "add_noise",
    "apply_mask",
    "cp_synthesize",
    "drop_slices",
    "estimate_frequencies",
    "factor_success",
    "freq_rmse",
    "frobenius_norm",
    "khatri_rao",
    "mode_n_fold",
    "mode_n_unfold",
    "normalize_max",
    "random_model",
    "rlne",
    "sample_uniform",
    "solve",
    "synthesize",
    "wcp_solve",
]
