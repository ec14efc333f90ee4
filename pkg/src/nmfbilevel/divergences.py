"""Beta-divergences and the scalar objectives shared by all solvers.

beta = 2 is the halved squared Frobenius distance, beta = 1 the
generalized Kullback-Leibler divergence (with the 0*log 0 = 0
convention) and beta = 0 the Itakura-Saito divergence.
"""

import numpy as np

from .matrices import EPS, check_product_shapes, clamp


def beta_div_elem(x, y, beta=1.0, clamp_y=True):
    """Elementwise beta-divergence d_beta(x, y).

    Accepts scalars or arrays (broadcast).  `y` is clamped below at EPS
    unless `clamp_y` is False, in which case nonpositive `y` raises.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if (x < 0).any():
        raise ValueError("x must be nonnegative")
    if clamp_y:
        y = clamp(y)
    elif (y <= 0).any():
        raise ValueError("y must be strictly positive when clamping is off")

    if beta == 1.0:
        # x*log(x/y) - x + y with 0*log 0 := 0
        xlog = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0) / y), 0.0)
        out = xlog - x + y
    elif beta == 2.0:
        out = 0.5 * (x - y) ** 2
    elif beta == 0.0:
        ratio = clamp(x) / y
        out = ratio - np.log(ratio) - 1.0
    else:
        out = (
            np.power(clamp(x), beta)
            + (beta - 1.0) * np.power(y, beta)
            - beta * x * np.power(y, beta - 1.0)
        ) / (beta * (beta - 1.0))
    # floor at zero: analytic value is nonnegative, round-off can dip below
    out = np.maximum(out, 0.0)
    return out if out.ndim else float(out)


def total_divergence(X, W, H, beta=1.0):
    """Sum of elementwise beta-divergences between X and WH."""
    check_product_shapes(X, W, H)
    return float(np.sum(beta_div_elem(X, W @ H, beta)))


def penalized_objective(X, W, H, lam):
    """KL divergence plus the row-weighted l1 penalty on W.

    `lam` holds one nonnegative weight per row of W.
    """
    check_product_shapes(X, W, H)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (W.shape[0],):
        raise ValueError(f"lambda must have length {W.shape[0]}, got {lam.shape}")
    return total_divergence(X, W, H, beta=1.0) + float(lam @ W.sum(axis=1))


def row_error(w, x_row, H):
    """Per-row KL reconstruction error sum_j d_1(x_j, (wH)_j)."""
    w = np.asarray(w, dtype=float)
    x_row = np.asarray(x_row, dtype=float)
    return float(np.sum(beta_div_elem(x_row, w @ H, beta=1.0)))


def row_loss(w, lam, x_row, H):
    """Per-row penalized KL loss: row_error plus lam * ||w||_1."""
    w = np.asarray(w, dtype=float)
    return row_error(w, x_row, H) + float(lam) * float(np.abs(w).sum())
