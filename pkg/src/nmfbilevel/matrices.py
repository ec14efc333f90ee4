"""Dense nonnegative matrix validation and CSV I/O.

All solvers operate on plain float64 numpy arrays in row-major order.
Matrices travel between tools as headerless CSV, one matrix row per line.
"""

import numpy as np

# Floor applied to every denominator and reconstruction entry before
# division or log.
EPS = 1e-16


def as_nonneg(a, name="matrix"):
    """Validate and return a 2-D nonnegative float array."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    if (arr < 0).any():
        raise ValueError(f"{name} contains negative entries")
    return arr


def clamp(a):
    """Clamp entries below at EPS (safe denominator / log argument)."""
    return np.maximum(a, EPS)


def check_product_shapes(X, W, H):
    n, m = X.shape
    if W.shape[0] != n or H.shape[1] != m or W.shape[1] != H.shape[0]:
        raise ValueError(
            f"incompatible shapes: X {X.shape}, W {W.shape}, H {H.shape}"
        )


def load_matrix_csv(path):
    """Load a headerless CSV matrix as a 2-D float array."""
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except OSError:
        raise
    except Exception as exc:
        raise ValueError(f"malformed matrix file {path}: {exc}") from exc


def save_matrix_csv(path, a):
    """Write a matrix as headerless CSV; float64 values round-trip exactly."""
    np.savetxt(path, np.asarray(a, dtype=float), delimiter=",", fmt="%.17g")


def positive_uniform(rng, shape):
    """Strictly positive uniform draw on (0, 1]; multiplicative updates
    cannot escape exact zeros, so initializers must avoid them."""
    return 1.0 - rng.random(shape)
