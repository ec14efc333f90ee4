"""Command-line driver: run campaigns, gradient checks, grid sweeps and
benchmark generation.

Exit codes: 0 success, 1 usage, 2 bad config, 3 runtime failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .benchmarks import BenchmarkSpec, generate
from .harness import (
    ExperimentConfig, all_failed, emit_csv, run_experiment,
)
from .hypergrad import (
    fd_hypergradient_oracle, fmd_hypergradient, rmd_hypergradient,
)
from .matrices import positive_uniform, save_matrix_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="nmfbilevel")
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="execute an experiment config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--algo", default=None,
                       help="comma-separated algorithm subset")
    p_run.add_argument("--quiet", action="store_true")

    p_gc = sub.add_parser("gradcheck",
                          help="compare FMD against RMD and finite differences")
    p_gc.add_argument("--seed", type=int, default=0)
    p_gc.add_argument("--instances", type=int, default=100)
    p_gc.add_argument("--quiet", action="store_true")

    p_sweep = sub.add_parser("sweep",
                             help="fixed-penalty grid comparison campaign")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--quiet", action="store_true")

    p_gen = sub.add_parser("gen", help="materialize a benchmark to CSV")
    p_gen.add_argument("--kind", required=True, choices=list("ABCDabcd"))
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--r", type=int, required=True)
    p_gen.add_argument("--alpha", type=float, default=0.1)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--signals", default=None,
                       help="reflectance CSV for benchmark D")
    p_gen.add_argument("--out", default=".")
    p_gen.add_argument("--quiet", action="store_true")
    return parser


def _load_config(path, seed=None, out=None, algos=None):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ValueError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValueError(f"config file {path} is not valid JSON: {exc}")
    cfg = ExperimentConfig.from_dict(raw)
    if seed is not None:
        cfg.base_seed = seed
    if out is not None:
        cfg.output_dir = out
    if algos is not None:
        cfg = ExperimentConfig(
            benchmark=cfg.benchmark, algorithms=tuple(algos),
            mc_runs=cfg.mc_runs, solver=cfg.solver, altbi=cfg.altbi,
            grid=cfg.grid, output_dir=cfg.output_dir,
            base_seed=cfg.base_seed, workers=cfg.workers)
    return cfg


def _cmd_run(args, force_algos=None):
    algos = force_algos
    if getattr(args, "algo", None):
        algos = [a.strip() for a in args.algo.split(",") if a.strip()]
    cfg = _load_config(args.config, args.seed, args.out, algos)
    reports = run_experiment(cfg)
    paths = emit_csv(reports, cfg.output_dir)
    if not args.quiet:
        for p in paths:
            print(f"wrote {p}")
    if all_failed(reports):
        print("error: at least one algorithm failed on every run",
              file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_sweep(args):
    return _cmd_run(args, force_algos=["mu", "altbi", "grid"])


def gradcheck(seed=0, instances=100, quiet=False):
    """Random-instance deviation sweep; returns (max FMD-vs-FD relative
    error, max FMD-vs-RMD relative error)."""
    rng = np.random.default_rng(seed)
    max_fd = 0.0
    max_rmd = 0.0
    for _ in range(instances):
        r = int(rng.integers(1, 6))
        m = int(rng.integers(2, 11))
        T = int(rng.integers(1, 5))
        lam = float(rng.uniform(0.1, 2.0))
        H = 0.1 + rng.random((r, m))
        w_true = 0.1 + rng.random(r)
        x = w_true @ H
        w0 = 0.1 + rng.random(r)
        fmd, _ = fmd_hypergradient(w0, lam, x, H, T)
        rmd = rmd_hypergradient(w0, lam, x, H, T)
        fd = fd_hypergradient_oracle(w0, lam, x, H, T, step=1e-6)
        scale = max(abs(fd), abs(fmd), 1e-12)
        max_fd = max(max_fd, abs(fmd - fd) / scale)
        max_rmd = max(max_rmd, abs(fmd - rmd) / max(abs(fmd), 1e-12))
    if not quiet:
        print(f"max relative deviation FMD vs FD:  {max_fd:.3e}")
        print(f"max relative deviation FMD vs RMD: {max_rmd:.3e}")
    return max_fd, max_rmd


def _cmd_gradcheck(args):
    max_fd, max_rmd = gradcheck(args.seed, args.instances, args.quiet)
    return EXIT_OK if max_fd <= 1e-4 and max_rmd <= 1e-10 else EXIT_RUNTIME


def _cmd_gen(args):
    spec = BenchmarkSpec(
        kind=args.kind.upper(), n=args.n, m=args.m, r=args.r,
        alpha_h=args.alpha, seed=args.seed, d_signals_path=args.signals,
    )
    truth = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_matrix_csv(out / "X.csv", truth.Y)
    save_matrix_csv(out / "W_true.csv", truth.W_true)
    save_matrix_csv(out / "H_true.csv", truth.H_true)
    if not args.quiet:
        print(f"wrote {out / 'X.csv'}, {out / 'W_true.csv'}, {out / 'H_true.csv'}")
    return EXIT_OK


def cli_main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "gradcheck":
            return _cmd_gradcheck(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "gen":
            return _cmd_gen(args)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_USAGE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
