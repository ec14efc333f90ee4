import math

import numpy as np
import pytest

from nmfbilevel.divergences import (
    beta_div_elem, penalized_objective, row_error, row_loss, total_divergence,
)


def test_kl_identity_is_zero():
    assert beta_div_elem(1.0, 1.0, beta=1.0) == 0.0


def test_kl_hand_value():
    # d_1(2, 1) = 2 ln 2 - 2 + 1
    assert beta_div_elem(2.0, 1.0) == pytest.approx(2.0 * math.log(2.0) - 1.0)


def test_kl_zero_x_convention():
    # 0*log 0 = 0, so d_1(0, 3) = 3
    assert beta_div_elem(0.0, 3.0) == pytest.approx(3.0)


def test_negative_x_rejected():
    with pytest.raises(ValueError):
        beta_div_elem(-1.0, 1.0)


def test_nonpositive_y_rejected_without_clamping():
    with pytest.raises(ValueError):
        beta_div_elem(1.0, 0.0, clamp_y=False)
    # with clamping on, y is floored instead
    assert np.isfinite(beta_div_elem(1.0, 0.0))


@pytest.mark.parametrize("beta", [0.0, 1.0, 2.0])
def test_divergence_nonneg_and_zero_iff_equal(beta):
    grid = np.linspace(0.1, 10.0, 25)
    for x in grid:
        for y in grid:
            d = beta_div_elem(x, y, beta)
            assert d >= 0.0
            if abs(x - y) > 1e-12:
                assert d > 0.0
        assert beta_div_elem(x, x, beta) == pytest.approx(0.0, abs=1e-12)


def test_total_divergence_exact_fit_is_zero():
    rng = np.random.default_rng(0)
    W = rng.random((4, 2)) + 0.1
    H = rng.random((2, 5)) + 0.1
    X = W @ H
    assert total_divergence(X, W, H) == pytest.approx(0.0, abs=1e-12)


def test_total_divergence_single_entry():
    X = np.array([[2.0]])
    W = np.array([[1.0]])
    H = np.array([[1.0]])
    assert total_divergence(X, W, H) == pytest.approx(2.0 * math.log(2.0) - 1.0)


def test_total_divergence_matches_elementwise_sum():
    rng = np.random.default_rng(1)
    X = rng.random((2, 2)) + 0.1
    W = rng.random((2, 2)) + 0.1
    H = rng.random((2, 2)) + 0.1
    Y = W @ H
    brute = sum(
        beta_div_elem(X[i, j], Y[i, j]) for i in range(2) for j in range(2)
    )
    assert total_divergence(X, W, H) == pytest.approx(brute, rel=1e-12)


def test_total_divergence_shape_mismatch():
    with pytest.raises(ValueError):
        total_divergence(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2)))


def test_total_divergence_scale_invariance():
    rng = np.random.default_rng(2)
    X = rng.random((3, 4)) + 0.1
    W = rng.random((3, 2)) + 0.1
    H = rng.random((2, 4)) + 0.1
    c = np.diag([0.3, 4.0])
    assert total_divergence(X, W @ c, np.linalg.inv(c) @ H) == pytest.approx(
        total_divergence(X, W, H), rel=1e-10
    )


def test_penalized_objective_zero_lambda_reduces_to_divergence():
    rng = np.random.default_rng(3)
    X = rng.random((3, 4)) + 0.1
    W = rng.random((3, 2)) + 0.1
    H = rng.random((2, 4)) + 0.1
    lam = np.zeros(3)
    assert penalized_objective(X, W, H, lam) == total_divergence(X, W, H)


def test_penalized_objective_hand_penalty():
    W = np.array([[1.0, 1.0]])
    H = np.array([[1.0], [1.0]])
    X = W @ H
    assert penalized_objective(X, W, H, np.array([2.0])) == pytest.approx(4.0)


def test_penalized_objective_matches_separate_sums():
    rng = np.random.default_rng(4)
    X = rng.random((3, 3)) + 0.1
    W = rng.random((3, 3)) + 0.1
    H = rng.random((3, 3)) + 0.1
    lam = rng.random(3)
    l1 = sum(lam[i] * W[i].sum() for i in range(3))
    assert penalized_objective(X, W, H, lam) == pytest.approx(
        total_divergence(X, W, H) + l1, rel=1e-12
    )


def test_row_loss_exact_fit_zero_lambda():
    rng = np.random.default_rng(5)
    H = rng.random((2, 4)) + 0.1
    w = rng.random(2) + 0.1
    assert row_loss(w, 0.0, w @ H, H) == pytest.approx(0.0, abs=1e-12)


def test_row_loss_hand_value():
    w = np.array([1.0])
    H = np.array([[1.0]])
    x = np.array([2.0])
    assert row_loss(w, 1.0, x, H) == pytest.approx(2.0 * math.log(2.0) - 1.0 + 1.0)


def test_row_error_equals_row_loss_at_zero_lambda():
    rng = np.random.default_rng(6)
    H = rng.random((3, 5)) + 0.1
    w = rng.random(3) + 0.1
    x = rng.random(5) + 0.1
    assert row_error(w, x, H) == row_loss(w, 0.0, x, H)


def test_row_decompositions():
    rng = np.random.default_rng(7)
    X = rng.random((4, 5)) + 0.1
    W = rng.random((4, 3)) + 0.1
    H = rng.random((3, 5)) + 0.1
    lam = rng.random(4)
    err_sum = sum(row_error(W[i], X[i], H) for i in range(4))
    loss_sum = sum(row_loss(W[i], lam[i], X[i], H) for i in range(4))
    assert err_sum == pytest.approx(total_divergence(X, W, H), rel=1e-12)
    assert loss_sum == pytest.approx(penalized_objective(X, W, H, lam), rel=1e-12)
