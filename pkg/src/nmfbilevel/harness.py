"""Seeded Monte-Carlo experiment driver and CSV report emission.

Run k of a campaign derives its initializers from base_seed + k; every
algorithm in the campaign receives the same W0, H0 for that run, so the
comparison isolates the update rules.  Reports are written as four CSV
files (traces, sir, sparsity, lambda) plus an aggregate summary.
"""

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .benchmarks import BenchmarkSpec, generate
from .bilevel import BilevelConfig, run_bilevel
from .matrices import positive_uniform
from .metrics import match_components, sparsity
from .mu import SolverConfig, grid_sweep, run_mu, run_pmu

logger = logging.getLogger(__name__)

KNOWN_ALGORITHMS = ("mu", "pmu", "altbi", "grid")
DEFAULT_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]

_FLOAT_FMT = "%.17g"


def _fmt(v):
    if v is None:
        return ""
    return _FLOAT_FMT % v


@dataclass
class ExperimentConfig:
    benchmark: BenchmarkSpec
    algorithms: tuple = ("mu", "pmu", "altbi")
    mc_runs: int = 30
    solver: SolverConfig = field(default_factory=SolverConfig)
    altbi: BilevelConfig = field(default_factory=BilevelConfig)
    grid: list = field(default_factory=lambda: list(DEFAULT_GRID))
    output_dir: str = "results"
    base_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.mc_runs < 1:
            raise ValueError("mc_runs must be >= 1")
        unknown = set(self.algorithms) - set(KNOWN_ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, d):
        """Build from a plain dict (parsed config file); unknown keys
        anywhere are errors."""
        d = dict(d)
        kwargs = {}
        if "benchmark" not in d:
            raise ValueError("config is missing the 'benchmark' section")
        kwargs["benchmark"] = _from_dict_strict(BenchmarkSpec, d.pop("benchmark"))
        if "solver" in d:
            kwargs["solver"] = _from_dict_strict(SolverConfig, d.pop("solver"))
        if "altbi" in d:
            kwargs["altbi"] = _from_dict_strict(BilevelConfig, d.pop("altbi"))
        for key in ("algorithms", "mc_runs", "grid", "output_dir",
                    "base_seed", "workers"):
            if key in d:
                kwargs[key] = d.pop(key)
        if d:
            raise ValueError(f"unknown config keys: {sorted(d)}")
        if "algorithms" in kwargs:
            kwargs["algorithms"] = tuple(kwargs["algorithms"])
        return cls(**kwargs)


def _from_dict_strict(cls, d):
    if not isinstance(d, dict):
        raise ValueError(f"expected a mapping for {cls.__name__}, got {type(d)}")
    valid = set(cls.__dataclass_fields__)
    unknown = set(d) - valid
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    return cls(**d)


@dataclass
class RunReport:
    """Everything recorded about one algorithm on one MC run."""

    algorithm: str
    run_id: int
    seed: int
    iterations: int = 0
    wall_time_s: float = 0.0
    final_objective: Optional[float] = None
    final_response: Optional[float] = None
    sir_w_db: Optional[float] = None
    sir_h_db: Optional[float] = None
    sir_w_per_component: Optional[np.ndarray] = None
    sir_h_per_component: Optional[np.ndarray] = None
    sparsity_w: Optional[float] = None
    sparsity_h: Optional[float] = None
    lambda_init: Optional[np.ndarray] = None
    lambda_final: Optional[np.ndarray] = None
    objective_trace: list = field(default_factory=list)
    response_trace: list = field(default_factory=list)
    error: Optional[str] = None


def _report_from_state(name, run_id, seed, state, truth, wall):
    sir_w = match_components(truth.W_true, state.W)
    sir_h = match_components(truth.H_true.T, state.H.T)
    return RunReport(
        algorithm=name,
        run_id=run_id,
        seed=seed,
        iterations=state.iterations,
        wall_time_s=wall,
        final_objective=state.objective_trace[-1],
        final_response=state.response_trace[-1],
        sir_w_db=sir_w.mean_db,
        sir_h_db=sir_h.mean_db,
        sir_w_per_component=sir_w.per_component_db,
        sir_h_per_component=sir_h.per_component_db,
        sparsity_w=sparsity(state.W),
        sparsity_h=sparsity(state.H),
        lambda_init=np.asarray(state.lambda_history[0]) if state.lambda_history else None,
        lambda_final=state.lam.copy(),
        objective_trace=list(state.objective_trace),
        response_trace=list(state.response_trace),
    )


def _run_single(cfg, truth, run_id):
    """All configured algorithms on one MC run's shared initializers."""
    seed = cfg.base_seed + run_id
    rng = np.random.default_rng(seed)
    spec = cfg.benchmark
    W0 = positive_uniform(rng, (spec.n, spec.r))
    H0 = positive_uniform(rng, (spec.r, spec.m))
    X = truth.Y
    reports = []
    for name in cfg.algorithms:
        start = time.perf_counter()
        try:
            if name == "mu":
                state = run_mu(X, W0, H0, cfg.solver)
                reports.append(_report_from_state(
                    name, run_id, seed, state, truth,
                    time.perf_counter() - start))
            elif name == "pmu":
                state = run_pmu(X, W0, H0, cfg.solver)
                reports.append(_report_from_state(
                    name, run_id, seed, state, truth,
                    time.perf_counter() - start))
            elif name == "altbi":
                state = run_bilevel(X, W0, H0, cfg.altbi)
                reports.append(_report_from_state(
                    name, run_id, seed, state, truth,
                    time.perf_counter() - start))
            elif name == "grid":
                for res in grid_sweep(X, W0, H0, cfg.solver, cfg.grid):
                    label = f"pmu[lambda={res.fixed_lambda:g}]"
                    reports.append(_report_from_state(
                        label, run_id, seed, res.state, truth,
                        time.perf_counter() - start))
        except Exception as exc:  # recorded, not fatal for the campaign
            logger.warning("run %d algorithm %s failed: %s", run_id, name, exc)
            reports.append(RunReport(
                algorithm=name, run_id=run_id, seed=seed, error=str(exc)))
    return reports


def run_experiment(cfg: ExperimentConfig):
    """Run the full Monte-Carlo campaign; returns the flat report list."""
    truth = generate(cfg.benchmark)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(
                _run_single, [cfg] * cfg.mc_runs, [truth] * cfg.mc_runs,
                range(cfg.mc_runs)))
    else:
        chunks = [_run_single(cfg, truth, k) for k in range(cfg.mc_runs)]
    reports = [rep for chunk in chunks for rep in chunk]
    failed = [r for r in reports if r.error is not None]
    if failed:
        logger.warning("%d of %d runs failed", len(failed), len(reports))
    return reports


def all_failed(reports):
    """True if some algorithm produced no successful run at all."""
    by_algo = {}
    for r in reports:
        by_algo.setdefault(r.algorithm, []).append(r)
    return any(all(r.error is not None for r in runs) for runs in by_algo.values())


def _write_rows(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_csv(reports, out_dir):
    """Write traces.csv, sir.csv, sparsity.csv, lambda.csv and
    summary.csv under out_dir; returns the list of paths written."""
    if not reports:
        raise ValueError("no reports to emit")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ok = [r for r in reports if r.error is None]

    trace_rows = []
    for r in ok:
        for it, (o, re) in enumerate(zip(r.objective_trace, r.response_trace)):
            trace_rows.append((r.run_id, r.algorithm, it, _fmt(o), _fmt(re)))
    sir_rows = []
    for r in ok:
        for comp, v in enumerate(r.sir_w_per_component):
            sir_rows.append((r.run_id, r.algorithm, "W", comp, _fmt(v)))
        for comp, v in enumerate(r.sir_h_per_component):
            sir_rows.append((r.run_id, r.algorithm, "H", comp, _fmt(v)))
    sp_rows = []
    for r in ok:
        sp_rows.append((r.run_id, r.algorithm, "W", _fmt(r.sparsity_w)))
        sp_rows.append((r.run_id, r.algorithm, "H", _fmt(r.sparsity_h)))
    lam_rows = []
    for r in ok:
        if r.algorithm == "altbi" and r.lambda_init is not None:
            for idx, (li, lf) in enumerate(zip(r.lambda_init, r.lambda_final)):
                lam_rows.append((r.run_id, idx, _fmt(li), _fmt(lf)))

    paths = []
    for name, header, rows in (
        ("traces.csv",
         ("run_id", "algorithm", "iter", "objective", "response"), trace_rows),
        ("sir.csv",
         ("run_id", "algorithm", "factor", "component", "sir_db"), sir_rows),
        ("sparsity.csv",
         ("run_id", "algorithm", "factor", "sparsity_pct"), sp_rows),
        ("lambda.csv",
         ("run_id", "row_index", "lambda_init", "lambda_final"), lam_rows),
    ):
        path = out / name
        try:
            _write_rows(path, header, rows)
        except OSError as exc:
            raise OSError(f"failed writing {path}: {exc}") from exc
        paths.append(path)
    paths.append(_write_summary(ok, out / "summary.csv"))
    return paths


def summarize(reports):
    """Per-algorithm aggregate statistics of SIR and sparsity."""
    by_algo = {}
    for r in reports:
        if r.error is None:
            by_algo.setdefault(r.algorithm, []).append(r)
    rows = []
    for algo in sorted(by_algo):
        runs = by_algo[algo]
        for metric, values in (
            ("sir_w_db", [r.sir_w_db for r in runs]),
            ("sir_h_db", [r.sir_h_db for r in runs]),
            ("sparsity_w", [r.sparsity_w for r in runs]),
            ("sparsity_h", [r.sparsity_h for r in runs]),
        ):
            vals = np.asarray([v for v in values if v is not None], dtype=float)
            if vals.size == 0:
                continue
            rows.append((
                algo, metric, vals.size,
                _fmt(vals.mean()), _fmt(np.median(vals)),
                _fmt(np.percentile(vals, 25)), _fmt(np.percentile(vals, 75)),
            ))
    return rows


def _write_summary(reports, path):
    _write_rows(
        path,
        ("algorithm", "metric", "n_runs", "mean", "median", "q1", "q3"),
        summarize(reports),
    )
    return path
