"""Per-row inner dynamics and hypergradients of the response function.

The inner map advances one row of W by the penalized multiplicative
update; its Jacobians w.r.t. the row state and the penalty weight feed
a forward-mode tangent recursion (the production path).  Reverse mode
and central finite differences are kept as cross-check oracles.
"""

from dataclasses import dataclass, field

import numpy as np

from .divergences import row_error
from .matrices import clamp
from .mu import update_w_penalized_row


@dataclass
class RowDynamics:
    """State of one row's inner dynamics: iterate, tangent, penalty."""

    w: np.ndarray
    lam: float
    Z: np.ndarray = None
    t: int = 0
    T: int = 4

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if (self.w < 0).any():
            raise ValueError("row state must be nonnegative")
        if self.Z is None:
            self.Z = np.zeros_like(self.w)


@dataclass
class HypergradPieces:
    """Jacobian blocks of one inner step plus the outer gradient."""

    A: np.ndarray  # (r, r), A[k, h] = dPhi_k / dw_h
    B: np.ndarray  # (r,),   B[k] = dPhi_k / dlam
    G: np.ndarray  # (r,),   G[k] = d(row error) / dw_k


def phi_step(dyn, x_row, H):
    """Advance the row state one multiplicative step; tangent untouched."""
    w_new = update_w_penalized_row(dyn.w, dyn.lam, x_row, H)
    return RowDynamics(w=w_new, lam=dyn.lam, Z=dyn.Z.copy(), t=dyn.t + 1, T=dyn.T)


def jacobian_A(w, lam, x_row, H):
    """Jacobian of the row update w.r.t. the row state.

    With y = wH, q = x/y, S_k = sum_j H_kj q_j and D_k = sum_j H_kj + lam:
    A[k, h] = (delta_kh S_k - w_k sum_j H_kj H_hj x_j / y_j^2) / D_k.
    """
    w = np.asarray(w, dtype=float)
    x_row = np.asarray(x_row, dtype=float)
    y = clamp(w @ H)
    q = x_row / y
    S = H @ q
    den = clamp(H.sum(axis=1) + float(lam))
    C = (H * (x_row / y**2)) @ H.T  # C[k, h] = sum_j H_kj H_hj x_j / y_j^2
    A = -(w / den)[:, None] * C
    A[np.diag_indices_from(A)] += S / den
    return A


def jacobian_B(w, lam, x_row, H):
    """Derivative of the row update w.r.t. the penalty weight:
    B[k] = -w_k S_k / (sum_j H_kj + lam)^2."""
    w = np.asarray(w, dtype=float)
    x_row = np.asarray(x_row, dtype=float)
    y = clamp(w @ H)
    S = H @ (x_row / y)
    den = clamp(H.sum(axis=1) + float(lam))
    return -(w * S) / den**2


def outer_gradient_G(w, x_row, H):
    """Gradient of the row reconstruction error:
    G[k] = sum_j H_kj (1 - x_j / (wH)_j)."""
    w = np.asarray(w, dtype=float)
    x_row = np.asarray(x_row, dtype=float)
    y = clamp(w @ H)
    return H.sum(axis=1) - H @ (x_row / y)


def pieces_at(w, lam, x_row, H):
    """All Jacobian blocks evaluated at one state."""
    return HypergradPieces(
        A=jacobian_A(w, lam, x_row, H),
        B=jacobian_B(w, lam, x_row, H),
        G=outer_gradient_G(w, x_row, H),
    )


def fmd_hypergradient(w0, lam, x_row, H, T):
    """Forward-mode hypergradient of the row response after T steps.

    Propagates the tangent Z_t = A_t Z_{t-1} + B_t from Z_0 = 0 and
    contracts with the outer gradient at w^(T).  The response has no
    direct dependence on the penalty weight, so that term is zero.
    Returns (gradient, advanced state w^(T)).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    w = np.asarray(w0, dtype=float).copy()
    Z = np.zeros_like(w)
    for t in range(T):
        A = jacobian_A(w, lam, x_row, H)
        B = jacobian_B(w, lam, x_row, H)
        Z = A @ Z + B
        w = update_w_penalized_row(w, lam, x_row, H)
        if not (np.isfinite(w).all() and np.isfinite(Z).all()):
            raise FloatingPointError(f"non-finite tangent state at inner step {t + 1}")
    G = outer_gradient_G(w, x_row, H)
    return float(G @ Z), w


def rmd_hypergradient(w0, lam, x_row, H, T):
    """Reverse-mode hypergradient; stores the T-step state history.

    Backward pass: alpha_T = G(w^(T)), alpha_{t-1} = alpha_t A_t,
    h accumulates alpha_t . B_t.  Equals the forward mode exactly up to
    floating-point commutativity; kept as a cross-check oracle.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    w = np.asarray(w0, dtype=float).copy()
    history = [w.copy()]
    for _ in range(T):
        w = update_w_penalized_row(w, lam, x_row, H)
        history.append(w.copy())
    alpha = outer_gradient_G(history[-1], x_row, H)
    h = 0.0  # direct d/dlam of the response is identically zero
    for t in range(T, 0, -1):
        w_prev = history[t - 1]
        h += float(alpha @ jacobian_B(w_prev, lam, x_row, H))
        alpha = alpha @ jacobian_A(w_prev, lam, x_row, H)
    return h


def fd_hypergradient_oracle(w0, lam, x_row, H, T, step=1e-6):
    """Central finite difference of lam -> row_error(w^(T)(lam))."""
    if lam - step < 0:
        raise ValueError("lam - step must stay nonnegative")

    def response(lam_val):
        w = np.asarray(w0, dtype=float).copy()
        for _ in range(T):
            w = update_w_penalized_row(w, lam_val, x_row, H)
        return row_error(w, x_row, H)

    return (response(lam + step) - response(lam - step)) / (2.0 * step)
