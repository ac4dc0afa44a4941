"""Command-line interface: simulate / sample / solve / evaluate /
experiment / selftest."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cp_als, experiments, fileio, metrics, simulate, solver
from .tensor import apply_mask

EXIT_USAGE = 2
EXIT_RUNTIME = 1


class ValidationError(ValueError):
    """User-input problem; exits with the usage code."""


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ValidationError(f"cannot parse dims {text!r}; use e.g. 16,16,16")
    if not dims or any(d < 1 for d in dims):
        raise ValidationError(f"dims must be positive integers, got {dims}")
    return dims


def _load_solver_config(args, config_path=None) -> dict:
    overrides = {}
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            doc = json.load(fh)
        allowed = {"lambda", "r_hat", "beta0", "rho", "tol", "max_iter",
                   "seed"}
        unknown = set(doc) - allowed
        if unknown:
            raise ValidationError(
                f"unknown config fields {sorted(unknown)} in {config_path}"
            )
        if "lambda" in doc:
            doc["lam"] = doc.pop("lambda")
        overrides.update(doc)
    return overrides


def cmd_simulate(args) -> int:
    dims = _parse_dims(args.dims)
    model = simulate.random_model(dims, args.rank, args.damped, args.seed)
    x = simulate.synthesize(model)
    if args.normalize:
        x, _ = simulate.normalize_max(x)
    if args.sigma > 0:
        x = simulate.add_noise(x, args.sigma, args.seed + 1)
    fileio.write_tensor(args.out, x)
    if args.model_out:
        simulate.save_model(args.model_out, model)
    print(f"wrote tensor {x.shape} to {args.out}")
    return 0


def cmd_sample(args) -> int:
    dims = _parse_dims(args.dims)
    if args.drop_mode is not None:
        if args.drop_fraction is None:
            raise ValidationError("--drop-mode requires --drop-fraction")
        omega = simulate.drop_slices(
            dims, args.drop_mode, args.drop_fraction, args.seed)
    else:
        if args.sr is None:
            raise ValidationError("provide --sr or --drop-mode/--drop-fraction")
        omega = simulate.sample_uniform(dims, args.sr, args.seed)
    fileio.write_mask(args.out, omega)
    print(f"wrote mask with {omega.count} of "
          f"{int(np.prod(dims))} entries to {args.out}")
    return 0


def cmd_solve(args) -> int:
    y = fileio.read_tensor(args.tensor)
    omega = fileio.read_mask(args.mask)
    if y.shape != omega.dims:
        raise ValidationError(
            f"tensor dims {y.shape} do not match mask dims {omega.dims}"
        )
    observed = apply_mask(y, omega)
    overrides = _load_solver_config(args, args.config)
    if args.lam is not None:
        overrides["lam"] = args.lam
    if args.r_hat is not None:
        overrides["r_hat"] = args.r_hat
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if args.seed is not None:
        overrides["seed"] = args.seed
    if "r_hat" not in overrides:
        raise ValidationError("provide --r-hat (or r_hat in --config)")

    if args.method == "hmrtc":
        cfg = solver.SolverConfig(**overrides)
        result = solver.solve(observed, omega, cfg)
    else:
        wargs = {"r_hat": overrides["r_hat"]}
        if "max_iter" in overrides:
            wargs["max_iter"] = overrides["max_iter"]
        if "seed" in overrides:
            wargs["seed"] = overrides["seed"]
        result = cp_als.wcp_solve(observed, omega, cp_als.WcpConfig(**wargs))

    fileio.write_tensor(args.out, result.reconstruction)
    if args.history_out:
        with open(args.history_out, "w", encoding="utf-8") as fh:
            fh.write(experiments.history_csv_text(result.history))
    print(f"{args.method}: {result.iterations} iterations, "
          f"converged={result.converged}, wrote {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    x = fileio.read_tensor(args.reconstruction)
    y = fileio.read_tensor(args.truth)
    if x.shape != y.shape:
        raise ValidationError(
            f"tensor dims {x.shape} do not match reference dims {y.shape}"
        )
    err = metrics.rlne(x, y)
    doc = {"rlne": err, "clipped_rlne": min(err, 1.0)}
    if args.json:
        print(json.dumps(doc))
    else:
        print(f"rlne {err:.6g} (clipped {doc['clipped_rlne']:.6g})")
    return 0


def cmd_experiment(args) -> int:
    spec = experiments.ExperimentSpec.from_file(args.spec)
    out_dir = args.out or spec.output
    if out_dir is None:
        raise ValidationError("provide --out or an 'output' field in the spec")
    result = experiments.run_experiment(
        spec, threads=args.threads, deterministic=args.deterministic,
        out_dir=out_dir)
    for agg in result.aggregates:
        print(
            f"cell {agg['cell']}: R={agg['rank']} r_hat={agg['r_hat']} "
            f"sr={agg['sr']} sigma={agg['sigma']} "
            f"mean_clipped_rlne={agg['mean_clipped_rlne']:.4f} "
            f"trials={agg['trials']}"
        )
    print(f"wrote {out_dir}/trials.csv and {out_dir}/aggregates.json")
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return run_selftest()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="expofill",
        description="Recover N-D exponential signals from partial samples "
                    "by Hankel-regularized low-rank tensor completion.",
    )
    p.add_argument("--json-errors", action="store_true",
                   help="report errors as JSON on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic signal")
    s.add_argument("--dims", required=True, help="comma-separated, e.g. 16,16,16")
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--damped", action="store_true")
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--normalize", action=argparse.BooleanOptionalAction,
                   default=True)
    s.add_argument("--out", required=True)
    s.add_argument("--model-out", default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sample", help="generate an observation mask")
    s.add_argument("--dims", required=True)
    s.add_argument("--sr", type=float, default=None)
    s.add_argument("--drop-mode", type=int, default=None,
                   help="drop whole slices along this zero-based mode")
    s.add_argument("--drop-fraction", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("solve", help="complete a partially observed tensor")
    s.add_argument("--tensor", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--method", choices=list(experiments.METHODS),
                   default="hmrtc")
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--r-hat", type=int, default=None)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--max-iter", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--config", default=None,
                   help="JSON file of solver settings")
    s.add_argument("--out", required=True)
    s.add_argument("--history-out", default=None)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("evaluate", help="score a reconstruction")
    s.add_argument("reconstruction")
    s.add_argument("truth")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("experiment", help="run a JSON experiment spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", default=None)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--deterministic", action="store_true",
                   help="force serial trial execution")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("selftest", help="run the built-in property battery")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        _report_error(args, exc)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        _report_error(args, exc)
        return EXIT_RUNTIME


def _report_error(args, exc) -> None:
    if getattr(args, "json_errors", False):
        print(json.dumps({"error": str(exc),
                          "type": type(exc).__name__}), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
