"""Declarative Monte Carlo experiments over synthetic exponential signals.

An experiment is a JSON document naming a scenario, a grid of cell
parameters, a trial count and a master seed. Every trial derives its own
seed from (master seed, cell index, trial index), and purpose-specific
substreams (model, noise, mask, solver init) from that, so any single
trial can be replayed from the seed recorded in its CSV row.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cp_als, metrics, simulate, solver
from .tensor import SamplingMask, apply_mask

SCENARIOS = (
    "phase_diagram",
    "rank_robustness",
    "noise_curve",
    "missing_slices",
    "single_run",
    "freq_table",
)
METHODS = ("hmrtc", "wcp")

TRIAL_CSV_COLUMNS = [
    "trial", "seed", "method", "R", "r_hat", "sr", "sigma", "lambda",
    "rlne", "clipped_rlne", "success", "freq_rmse", "iters", "wall_time_s",
]

# Purpose tags for per-trial RNG substreams.
_STREAM_MODEL = 0
_STREAM_NOISE = 1
_STREAM_MASK = 2
_STREAM_SOLVER = 3


def trial_seed(master_seed: int, cell: int, trial: int) -> int:
    """64-bit seed for one (cell, trial) pair."""
    ss = np.random.SeedSequence([int(master_seed), int(cell), int(trial)])
    return int(ss.generate_state(1, np.uint64)[0])


def substream_seed(seed: int, purpose: int) -> int:
    ss = np.random.SeedSequence([int(seed), int(purpose)])
    return int(ss.generate_state(1, np.uint64)[0])


_SOLVER_KEYS = {"beta0", "rho", "tol", "max_iter"}
_TOP_KEYS = {
    "scenario", "dims", "method", "damped", "trials", "master_seed",
    "output", "rank", "sr", "sigma", "r_hat", "r_hat_factor", "lambda",
    "grid", "solver", "drop_mode", "drop_fraction", "zero_pad",
}


@dataclass
class ExperimentSpec:
    scenario: str
    dims: tuple[int, ...]
    method: str = "hmrtc"
    damped: bool = True
    trials: int = 10
    master_seed: int = 0
    output: str | None = None
    rank: int | None = None
    sr: float | None = None
    sigma: float = 0.0
    r_hat: int | None = None
    r_hat_factor: float | None = None
    lam: float | None = None
    grid: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    drop_mode: int | None = None
    drop_fraction: float | None = None
    zero_pad: int = 4

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(
                f"unknown scenario {self.scenario!r}; expected one of "
                f"{SCENARIOS}"
            )
        if self.method not in METHODS:
            raise ValueError(
                f"unknown method {self.method!r}; expected one of {METHODS}"
            )
        self.dims = tuple(int(d) for d in self.dims)
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError(f"invalid dims {self.dims}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        unknown = set(self.solver) - _SOLVER_KEYS
        if unknown:
            raise ValueError(
                f"unknown solver override fields {sorted(unknown)}; "
                f"allowed: {sorted(_SOLVER_KEYS)}"
            )
        self.cells = self._build_cells()

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        unknown = set(doc) - _TOP_KEYS
        if unknown:
            raise ValueError(
                f"unknown experiment spec fields {sorted(unknown)}"
            )
        if "scenario" not in doc or "dims" not in doc:
            raise ValueError("experiment spec requires 'scenario' and 'dims'")
        kwargs = dict(doc)
        if "lambda" in kwargs:
            kwargs["lam"] = kwargs.pop("lambda")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    # ----- grid expansion -------------------------------------------------

    def _require(self, name: str):
        value = getattr(self, "lam" if name == "lambda" else name)
        if value is None:
            raise ValueError(
                f"scenario {self.scenario!r} requires field {name!r}"
            )
        return value

    def _resolve_r_hat(self, rank: int, override=None) -> int:
        if override is not None:
            return int(override)
        if self.r_hat is not None:
            return int(self.r_hat)
        if self.r_hat_factor is not None:
            return max(1, int(round(self.r_hat_factor * rank)))
        raise ValueError("provide either 'r_hat' or 'r_hat_factor'")

    def _base_cell(self, **overrides) -> dict:
        rank = int(overrides.pop("rank", None) or self._require("rank"))
        cell = {
            "rank": rank,
            "sigma": float(overrides.pop("sigma", self.sigma)),
            "lam": overrides.pop("lam", self.lam),
            "r_hat": self._resolve_r_hat(
                rank, overrides.pop("r_hat", None)),
            "sr": None,
            "drop_mode": None,
            "drop_fraction": None,
        }
        cell.update(overrides)
        return cell

    def _build_cells(self) -> list[dict]:
        grid = dict(self.grid)
        if self.scenario == "phase_diagram":
            ranks = grid.pop("rank", None)
            srs = grid.pop("sr", None)
            if grid:
                raise ValueError(f"unknown grid fields {sorted(grid)}")
            if not ranks or not srs:
                raise ValueError(
                    "phase_diagram grid requires 'rank' and 'sr' lists"
                )
            return [
                self._base_cell(rank=int(r), sr=float(s))
                for r in ranks for s in srs
            ]
        if self.scenario == "rank_robustness":
            r_hats = grid.pop("r_hat", None)
            if grid:
                raise ValueError(f"unknown grid fields {sorted(grid)}")
            if not r_hats:
                raise ValueError(
                    "rank_robustness grid requires an 'r_hat' list"
                )
            return [
                self._base_cell(sr=float(self._require("sr")),
                                r_hat=int(rh))
                for rh in r_hats
            ]
        if self.scenario == "noise_curve":
            sigmas = grid.pop("sigma", None)
            lams = grid.pop("lambda", None)
            if grid:
                raise ValueError(f"unknown grid fields {sorted(grid)}")
            if not sigmas:
                raise ValueError("noise_curve grid requires a 'sigma' list")
            if lams is not None and len(lams) != len(sigmas):
                raise ValueError(
                    "'lambda' list must match the 'sigma' list length"
                )
            return [
                self._base_cell(
                    sr=float(self._require("sr")),
                    sigma=float(s),
                    lam=(float(lams[i]) if lams is not None else self.lam),
                )
                for i, s in enumerate(sigmas)
            ]
        if grid:
            raise ValueError(
                f"scenario {self.scenario!r} does not take a grid"
            )
        if self.scenario == "missing_slices":
            mode = self._require("drop_mode")
            fraction = self._require("drop_fraction")
            return [self._base_cell(drop_mode=int(mode),
                                    drop_fraction=float(fraction))]
        # single_run / freq_table
        return [self._base_cell(sr=float(self._require("sr")))]


@dataclass
class TrialRecord:
    cell: int
    trial: int
    seed: int
    method: str
    rank: int
    r_hat: int
    sr: float
    sigma: float
    lam: float | None
    scores: metrics.MetricsRecord
    iterations: int

    def csv_row(self) -> list:
        s = self.scores
        return [
            self.trial, self.seed, self.method, self.rank, self.r_hat,
            repr(self.sr), repr(self.sigma),
            "" if self.lam is None else repr(float(self.lam)),
            repr(s.rlne), repr(s.clipped_rlne),
            "" if s.success is None else int(s.success),
            "" if s.freq_rmse is None else repr(s.freq_rmse),
            self.iterations, f"{s.wall_time:.6f}",
        ]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    trials: list[TrialRecord]
    aggregates: list[dict]


def _build_mask(spec: ExperimentSpec, cell: dict, seed: int) -> SamplingMask:
    if cell["drop_mode"] is not None:
        return simulate.drop_slices(
            spec.dims, cell["drop_mode"], cell["drop_fraction"], seed)
    return simulate.sample_uniform(spec.dims, cell["sr"], seed)


def run_trial(spec: ExperimentSpec, cell_index: int,
              trial: int) -> TrialRecord:
    """Generate, solve and score one trial; fully determined by the spec,
    cell index and trial index."""
    cell = spec.cells[cell_index]
    seed = trial_seed(spec.master_seed, cell_index, trial)
    model = simulate.random_model(
        spec.dims, cell["rank"], spec.damped,
        substream_seed(seed, _STREAM_MODEL))
    truth, _ = simulate.normalize_max(simulate.synthesize(model))
    noisy = simulate.add_noise(
        truth, cell["sigma"], substream_seed(seed, _STREAM_NOISE))
    omega = _build_mask(spec, cell, substream_seed(seed, _STREAM_MASK))
    observed = apply_mask(noisy, omega)

    start = time.perf_counter()
    if spec.method == "hmrtc":
        lam = cell["lam"]
        if lam is None:
            raise ValueError("hmrtc runs require 'lambda'")
        cfg = solver.SolverConfig(
            r_hat=cell["r_hat"], lam=float(lam),
            seed=substream_seed(seed, _STREAM_SOLVER), **spec.solver)
        result = solver.solve(observed, omega, cfg)
    else:
        wcfg_kwargs = {}
        if "max_iter" in spec.solver:
            wcfg_kwargs["max_iter"] = spec.solver["max_iter"]
        wcfg = cp_als.WcpConfig(
            r_hat=cell["r_hat"],
            seed=substream_seed(seed, _STREAM_SOLVER), **wcfg_kwargs)
        result = cp_als.wcp_solve(observed, omega, wcfg)
    elapsed = time.perf_counter() - start

    err = metrics.rlne(result.reconstruction, truth)
    success = metrics.factor_success(
        simulate.vandermonde_factors(model), result.factors)
    rmse = None
    if spec.scenario == "freq_table":
        est = metrics.estimate_frequencies(
            result.reconstruction, model.rank, zero_pad=spec.zero_pad)
        if not est.short_count:
            rmse = metrics.freq_rmse(model.freqs, est.frequencies)
    return TrialRecord(
        cell=cell_index, trial=trial, seed=seed, method=spec.method,
        rank=cell["rank"], r_hat=cell["r_hat"],
        sr=omega.sampling_ratio, sigma=cell["sigma"],
        lam=(None if spec.method == "wcp" else cell["lam"]),
        scores=metrics.make_record(err, success=success,
                                   freq_rmse_value=rmse,
                                   wall_time=elapsed),
        iterations=result.iterations,
    )


def run_experiment(spec: ExperimentSpec, threads: int = 1,
                   deterministic: bool = False,
                   out_dir=None) -> ExperimentResult:
    """Run every (cell, trial) pair, aggregate per cell, optionally write
    trials.csv and aggregates.json into out_dir.

    Trials are pure functions of their derived seeds, so scientific
    outputs do not depend on the execution order or thread count;
    ``deterministic`` forces serial execution.
    """
    keys = [(c, t) for c in range(len(spec.cells))
            for t in range(spec.trials)]
    if deterministic or threads <= 1:
        results = {k: run_trial(spec, *k) for k in keys}
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {k: pool.submit(run_trial, spec, *k) for k in keys}
            results = {k: f.result() for k, f in futures.items()}
    trials = [results[k] for k in keys]

    aggregates = []
    for c, cell in enumerate(spec.cells):
        cell_records = [t.scores for t in trials if t.cell == c]
        agg = metrics.monte_carlo_average(cell_records)
        short = sum(
            1 for t in trials
            if t.cell == c and spec.scenario == "freq_table"
            and t.scores.freq_rmse is None
        )
        aggregates.append({
            "cell": c,
            "rank": cell["rank"],
            "r_hat": cell["r_hat"],
            "sr": cell["sr"],
            "sigma": cell["sigma"],
            "lambda": cell["lam"],
            "drop_mode": cell["drop_mode"],
            "drop_fraction": cell["drop_fraction"],
            "trials": agg.trials,
            "mean_clipped_rlne": agg.mean_clipped_rlne,
            "std_clipped_rlne": agg.std_clipped_rlne,
            "mean_rlne": agg.mean_rlne,
            "success_rate": agg.success_rate,
            "mean_freq_rmse": agg.mean_freq_rmse,
            "short_count_trials": short,
        })

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "trials.csv"), "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRIAL_CSV_COLUMNS)
            for t in trials:
                writer.writerow(t.csv_row())
        with open(os.path.join(out_dir, "aggregates.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(aggregates, fh, indent=2)
            fh.write("\n")
    return ExperimentResult(spec=spec, trials=trials, aggregates=aggregates)


def trials_csv_text(result: ExperimentResult,
                    include_wall_time: bool = True) -> str:
    """Render the per-trial table as CSV text (RFC 4180 quoting)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    cols = list(TRIAL_CSV_COLUMNS)
    if not include_wall_time:
        cols = cols[:-1]
    writer.writerow(cols)
    for t in result.trials:
        row = t.csv_row()
        if not include_wall_time:
            row = row[:-1]
        writer.writerow(row)
    return buf.getvalue()


def history_csv_text(history) -> str:
    """Solver history as CSV. ADMM histories use the iter/delta_x/
    feasibility_gap/lagrangian/beta schema; ALS histories use
    iter/objective/rel_change."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    if history and isinstance(history[0], cp_als.WcpIterationRecord):
        writer.writerow(["iter", "objective", "rel_change"])
        for rec in history:
            writer.writerow([rec.iteration, repr(rec.objective),
                             repr(rec.rel_change)])
    else:
        writer.writerow(
            ["iter", "delta_x", "feasibility_gap", "lagrangian", "beta"])
        for rec in history:
            writer.writerow([
                rec.iteration, repr(rec.delta_x),
                repr(rec.feasibility_gap), repr(rec.lagrangian),
                repr(rec.beta),
            ])
    return buf.getvalue()
