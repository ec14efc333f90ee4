"""Evaluation: scale-matched SIR with permutation alignment, the
sparsity percentage, and the KKT stationarity residual."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .matrices import check_product_shapes, clamp

SIR_CAP_DB = 300.0  # stands in for +inf on exact matches


@dataclass
class SirReport:
    per_component_db: np.ndarray
    mean_db: float
    assignment: np.ndarray  # assignment[k] = estimated component matched to true k
    scales: np.ndarray


def sir_db(true_sig, est_sig):
    """Signal-to-interference ratio in dB after optimal scalar scaling.

    SIR = 10 log10(||s||^2 / ||s - c s_hat||^2) with c the least-squares
    scale of the estimate onto the true signal; capped at SIR_CAP_DB.
    """
    s = np.asarray(true_sig, dtype=float).ravel()
    e = np.asarray(est_sig, dtype=float).ravel()
    s_norm2 = float(s @ s)
    if s_norm2 == 0.0:
        raise ValueError("true signal must be nonzero")
    e_norm2 = float(e @ e)
    c = float(s @ e) / e_norm2 if e_norm2 > 0 else 0.0
    resid = s - c * e
    resid_norm2 = float(resid @ resid)
    if resid_norm2 <= s_norm2 * 10.0 ** (-SIR_CAP_DB / 10.0):
        return SIR_CAP_DB
    return min(10.0 * np.log10(s_norm2 / resid_norm2), SIR_CAP_DB)


def _optimal_scale(s, e):
    e_norm2 = float(e @ e)
    return float(s @ e) / e_norm2 if e_norm2 > 0 else 0.0


def match_components(A_true, A_est):
    """Align estimated columns to true columns and score each pair.

    Solves the exact one-to-one assignment maximizing total SIR over the
    r x r pairwise table (components are identifiable only up to
    permutation and positive scaling).  Pass transposed matrices to
    match rows instead of columns.
    """
    A_true = np.asarray(A_true, dtype=float)
    A_est = np.asarray(A_est, dtype=float)
    if A_true.shape != A_est.shape:
        raise ValueError(
            f"shape mismatch: {A_true.shape} vs {A_est.shape}"
        )
    r = A_true.shape[1]
    table = np.empty((r, r))
    for k in range(r):
        for h in range(r):
            table[k, h] = sir_db(A_true[:, k], A_est[:, h])
    rows, cols = linear_sum_assignment(-table)
    assignment = cols[np.argsort(rows)]
    per = table[np.arange(r), assignment]
    scales = np.array([
        _optimal_scale(A_true[:, k], A_est[:, assignment[k]]) for k in range(r)
    ])
    return SirReport(
        per_component_db=per,
        mean_db=float(per.mean()),
        assignment=assignment,
        scales=scales,
    )


def sparsity(A, tol=1e-6):
    """Percentage of entries at or below tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    A = np.asarray(A, dtype=float)
    return 100.0 * float(np.count_nonzero(A <= tol)) / A.size


def kkt_gradient_w(X, W, H, lam):
    """Gradient of the penalized KL objective in W:
    (1 - X / (WH)) H^T + lam per row."""
    check_product_shapes(X, W, H)
    Y = clamp(W @ H)
    return H.sum(axis=1)[None, :] - (X / Y) @ H.T \
        + np.asarray(lam, dtype=float)[:, None]


def kkt_residual(X, W, H, lam):
    """Stationarity residual ||W .* grad_W F||_inf; zero at KKT points."""
    return float(np.abs(W * kkt_gradient_w(X, W, H, lam)).max())
