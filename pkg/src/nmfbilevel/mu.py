"""Multiplicative update rules and the two fixed-penalty baseline solvers.

`run_mu` is the classic unpenalized KL solver; `run_pmu` alternates the
KL update for H with the penalized row-wise rule for W under a fixed
l1 weight.  `grid_sweep` repeats `run_pmu` over a list of weights.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .divergences import penalized_objective, total_divergence
from .matrices import EPS, as_nonneg, check_product_shapes, clamp


@dataclass
class SolverConfig:
    max_iter: int = 1000
    tol: float = 1e-6
    beta: float = 1.0
    fixed_lambda: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")


@dataclass
class FactorizationState:
    """Final factors plus per-iteration traces of a solver run."""

    W: np.ndarray
    H: np.ndarray
    lam: np.ndarray
    iterations: int
    objective_trace: list = field(default_factory=list)
    response_trace: list = field(default_factory=list)
    lambda_history: list = field(default_factory=list)


def update_h_beta(X, W, H, beta=1.0):
    """One multiplicative H update for the general beta-divergence.

    H <- H .* (W^T((WH)^[b-2] .* X)) / (W^T (WH)^[b-1]).  Monotone for
    0 <= beta <= 2; outside that range the rule is applied with a warning.
    """
    check_product_shapes(X, W, H)
    if beta < 0.0 or beta > 2.0:
        warnings.warn(
            f"beta={beta} outside [0, 2]: monotone descent is not guaranteed",
            stacklevel=2,
        )
    Y = clamp(W @ H)
    num = W.T @ (np.power(Y, beta - 2.0) * X)
    den = clamp(W.T @ np.power(Y, beta - 1.0))
    return H * (num / den)


def update_h_kl(X, W, H):
    """KL specialization of the H update: denominator is the column-sum
    vector of W broadcast across columns."""
    check_product_shapes(X, W, H)
    Y = clamp(W @ H)
    num = W.T @ (X / Y)
    den = clamp(W.sum(axis=0))[:, None]
    return H * (num / den)


def update_w_penalized(X, W, H, lam):
    """Bulk penalized W update, applied to every row at once.

    Row k of W scales by (sum_j H_kj x_j / (WH)_j) / (sum_j H_kj + lam_i).
    """
    check_product_shapes(X, W, H)
    Y = clamp(W @ H)
    num = (X / Y) @ H.T
    den = clamp(H.sum(axis=1)[None, :] + np.asarray(lam, dtype=float)[:, None])
    return W * (num / den)


def update_w_penalized_row(w, lam, x_row, H):
    """Single-row penalized multiplicative update (the inner map Phi)."""
    w = np.asarray(w, dtype=float)
    x_row = np.asarray(x_row, dtype=float)
    y = clamp(w @ H)
    num = H @ (x_row / y)
    den = clamp(H.sum(axis=1) + float(lam))
    return w * (num / den)


def _rel_change(prev, cur):
    return abs(prev - cur) / max(prev, EPS)


def _run_fixed_lambda(X, W0, H0, lam, cfg):
    """Alternate H and W updates under a fixed per-row penalty vector."""
    X = as_nonneg(X, "X")
    W = as_nonneg(W0, "W0").copy()
    H = as_nonneg(H0, "H0").copy()
    lam = np.asarray(lam, dtype=float)
    check_product_shapes(X, W, H)

    obj = [penalized_objective(X, W, H, lam)]
    resp = [total_divergence(X, W, H)]
    it = 0
    for it in range(1, cfg.max_iter + 1):
        if cfg.beta == 1.0:
            H = update_h_kl(X, W, H)
        else:
            H = update_h_beta(X, W, H, cfg.beta)
        W = update_w_penalized(X, W, H, lam)
        F = penalized_objective(X, W, H, lam)
        if not np.isfinite(F):
            raise FloatingPointError(
                f"non-finite objective at iteration {it} (F={F})"
            )
        resp.append(total_divergence(X, W, H))
        err = _rel_change(obj[-1], F)
        obj.append(F)
        if err < cfg.tol:
            break
    return FactorizationState(
        W=W, H=H, lam=lam.copy(), iterations=it,
        objective_trace=obj, response_trace=resp,
    )


def run_mu(X, W0, H0, cfg=None):
    """Unpenalized multiplicative-update KL solver."""
    cfg = cfg or SolverConfig()
    lam = np.zeros(np.asarray(W0).shape[0])
    return _run_fixed_lambda(X, W0, H0, lam, cfg)


def run_pmu(X, W0, H0, cfg=None, lam=None):
    """Penalized baseline with a fixed l1 weight on every row of W.

    `lam` may override the scalar config weight with a per-row vector.
    """
    cfg = cfg or SolverConfig()
    if lam is None:
        lam = np.full(np.asarray(W0).shape[0], float(cfg.fixed_lambda))
    return _run_fixed_lambda(X, W0, H0, lam, cfg)


@dataclass
class GridResult:
    """One fixed-penalty run of a grid sweep."""

    fixed_lambda: float
    state: FactorizationState


def grid_sweep(X, W0, H0, cfg, grid):
    """Run `run_pmu` once per grid value, sharing the initializers."""
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if any(g < 0 for g in grid):
        raise ValueError("grid entries must be nonnegative")
    results = []
    for g in grid:
        lam = np.full(np.asarray(W0).shape[0], g)
        state = _run_fixed_lambda(X, W0, H0, lam, cfg)
        results.append(GridResult(fixed_lambda=g, state=state))
    return results
