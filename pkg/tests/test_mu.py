import numpy as np
import pytest

from nmfbilevel.divergences import (
    penalized_objective, row_loss, total_divergence,
)
from nmfbilevel.metrics import sparsity
from nmfbilevel.mu import (
    SolverConfig, grid_sweep, run_mu, run_pmu, update_h_beta, update_h_kl,
    update_w_penalized, update_w_penalized_row,
)


def _random_instance(rng, n, m, r):
    X = rng.random((n, m)) + 0.1
    W = rng.random((n, r)) + 0.1
    H = rng.random((r, m)) + 0.1
    return X, W, H


def test_update_h_fixed_point_on_exact_fit():
    rng = np.random.default_rng(0)
    W = rng.random((4, 2)) + 0.1
    H = rng.random((2, 5)) + 0.1
    X = W @ H
    for beta in (0.0, 1.0, 2.0):
        H_new = update_h_beta(X, W, H, beta)
        assert np.allclose(H_new, H, rtol=1e-12)
    assert np.allclose(update_h_kl(X, W, H), H, rtol=1e-12)


def test_update_h_scalar_case():
    X = np.array([[2.0]])
    W = np.array([[1.0]])
    H = np.array([[1.0]])
    assert update_h_beta(X, W, H, 1.0) == pytest.approx(np.array([[2.0]]))
    assert update_h_kl(X, W, H) == pytest.approx(np.array([[2.0]]))


def test_update_h_beta2_matches_frobenius_rule():
    rng = np.random.default_rng(1)
    X, W, H = _random_instance(rng, 4, 3, 2)
    expected = H * (W.T @ X) / (W.T @ W @ H)
    assert np.allclose(update_h_beta(X, W, H, 2.0), expected, rtol=1e-12)


def test_update_h_kl_matches_general_rule_at_beta_one():
    rng = np.random.default_rng(2)
    for _ in range(10):
        X, W, H = _random_instance(rng, 5, 4, 3)
        assert np.allclose(
            update_h_kl(X, W, H), update_h_beta(X, W, H, 1.0), rtol=1e-12
        )


def test_update_h_warns_outside_range():
    rng = np.random.default_rng(3)
    X, W, H = _random_instance(rng, 3, 3, 2)
    with pytest.warns(UserWarning):
        update_h_beta(X, W, H, 2.5)


@pytest.mark.parametrize("beta", [0.0, 1.0, 2.0])
def test_update_h_monotone_descent(beta):
    rng = np.random.default_rng(4)
    for _ in range(100):
        X, W, H = _random_instance(rng, 5, 4, 2)
        before = total_divergence(X, W, H, beta)
        H_new = update_h_beta(X, W, H, beta)
        after = total_divergence(X, W, H_new, beta)
        assert after <= before * (1.0 + 1e-12)
        assert (H_new >= 0).all()


def test_update_w_row_fixed_point():
    rng = np.random.default_rng(5)
    H = rng.random((2, 5)) + 0.1
    w = rng.random(2) + 0.1
    x = w @ H
    assert np.allclose(update_w_penalized_row(w, 0.0, x, H), w, rtol=1e-12)


def test_update_w_row_hand_case():
    w = np.array([1.0])
    H = np.array([[1.0]])
    x = np.array([1.0])
    assert update_w_penalized_row(w, 1.0, x, H) == pytest.approx([0.5])


def test_update_w_row_matches_scalar_loop():
    rng = np.random.default_rng(6)
    r, m = 3, 5
    H = rng.random((r, m)) + 0.1
    w = rng.random(r) + 0.1
    x = rng.random(m) + 0.1
    lam = 0.7
    y = np.array([sum(w[a] * H[a, j] for a in range(r)) for j in range(m)])
    expected = np.array([
        w[k] * sum(H[k, j] * x[j] / y[j] for j in range(m))
        / (sum(H[k, j] for j in range(m)) + lam)
        for k in range(r)
    ])
    got = update_w_penalized_row(w, lam, x, H)
    assert np.allclose(got, expected, rtol=1e-12)
    assert row_loss(got, lam, x, H) <= row_loss(w, lam, x, H)


def test_update_w_row_monotone_descent():
    rng = np.random.default_rng(7)
    for _ in range(100):
        r = int(rng.integers(1, 6))
        m = int(rng.integers(2, 11))
        H = rng.random((r, m)) + 0.1
        w = rng.random(r) + 0.1
        x = rng.random(m) + 0.1
        lam = float(rng.uniform(0.0, 2.0))
        w_new = update_w_penalized_row(w, lam, x, H)
        assert (w_new >= 0).all()
        assert row_loss(w_new, lam, x, H) <= row_loss(w, lam, x, H) * (1 + 1e-12)


def test_update_w_bulk_matches_rows():
    rng = np.random.default_rng(8)
    X, W, H = _random_instance(rng, 6, 5, 3)
    lam = rng.random(6)
    bulk = update_w_penalized(X, W, H, lam)
    rows = np.array([
        update_w_penalized_row(W[i], lam[i], X[i], H) for i in range(6)
    ])
    assert np.allclose(bulk, rows, rtol=1e-12)


def test_run_mu_exact_initial_fit_stops_immediately():
    rng = np.random.default_rng(9)
    W0 = rng.random((4, 2)) + 0.1
    H0 = rng.random((2, 5)) + 0.1
    state = run_mu(W0 @ H0, W0, H0)
    assert state.iterations == 1
    assert state.objective_trace[-1] == pytest.approx(0.0, abs=1e-10)


def test_run_mu_rank_one_recovery():
    rng = np.random.default_rng(10)
    u = rng.random(8) + 0.1
    v = rng.random(6) + 0.1
    X = np.outer(u, v)
    W0 = rng.random((8, 1)) + 0.1
    H0 = rng.random((1, 6)) + 0.1
    state = run_mu(X, W0, H0, SolverConfig(tol=1e-12, max_iter=2000))
    assert state.objective_trace[-1] < 1e-8


def test_run_mu_monotone_trace():
    rng = np.random.default_rng(11)
    X, W0, H0 = _random_instance(rng, 30, 10, 3)
    state = run_mu(X, W0, H0, SolverConfig(max_iter=200))
    trace = np.array(state.objective_trace)
    assert (np.diff(trace) <= 1e-12 * np.maximum(trace[:-1], 1.0)).all()


def test_run_pmu_zero_lambda_equals_run_mu():
    rng = np.random.default_rng(12)
    X, W0, H0 = _random_instance(rng, 10, 8, 2)
    cfg = SolverConfig(max_iter=50, fixed_lambda=0.0)
    s_mu = run_mu(X, W0, H0, cfg)
    s_pmu = run_pmu(X, W0, H0, cfg)
    assert np.array_equal(s_mu.W, s_pmu.W)
    assert np.array_equal(s_mu.H, s_pmu.H)
    assert s_mu.objective_trace == s_pmu.objective_trace


def test_run_pmu_monotone_penalized_trace_and_sparser_w():
    rng = np.random.default_rng(13)
    X, W0, H0 = _random_instance(rng, 40, 12, 3)
    cfg = SolverConfig(max_iter=300)
    s_pmu = run_pmu(X, W0, H0, cfg)
    trace = np.array(s_pmu.objective_trace)
    assert (np.diff(trace) <= 1e-12 * np.maximum(trace[:-1], 1.0)).all()
    s_mu = run_mu(X, W0, H0, cfg)
    assert sparsity(s_pmu.W, 1e-3) >= sparsity(s_mu.W, 1e-3)


def test_grid_sweep_zero_grid_equals_mu():
    rng = np.random.default_rng(14)
    X, W0, H0 = _random_instance(rng, 8, 6, 2)
    cfg = SolverConfig(max_iter=40)
    results = grid_sweep(X, W0, H0, cfg, [0.0])
    s_mu = run_mu(X, W0, H0, cfg)
    assert len(results) == 1
    assert np.array_equal(results[0].state.W, s_mu.W)
    assert np.array_equal(results[0].state.H, s_mu.H)


def test_grid_sweep_order_and_monotone_traces():
    rng = np.random.default_rng(15)
    X, W0, H0 = _random_instance(rng, 15, 8, 2)
    grid = [0.1 * k for k in range(1, 11)]
    results = grid_sweep(X, W0, H0, SolverConfig(max_iter=100), grid)
    assert [res.fixed_lambda for res in results] == pytest.approx(grid)
    for res in results:
        trace = np.array(res.state.objective_trace)
        assert (np.diff(trace) <= 1e-12 * np.maximum(trace[:-1], 1.0)).all()


def test_grid_sweep_rejects_bad_grid():
    rng = np.random.default_rng(16)
    X, W0, H0 = _random_instance(rng, 4, 4, 2)
    with pytest.raises(ValueError):
        grid_sweep(X, W0, H0, SolverConfig(), [])
    with pytest.raises(ValueError):
        grid_sweep(X, W0, H0, SolverConfig(), [-0.5])
