import numpy as np
import pytest

from oracles import pgd_step_reference
from simam.core_math import project_rows
from simam.errors import ConfigError, FitError, InitDegenerate, SizeError
from simam.estimator import (fit_network, fit_node, paper_init, pgd_step, predict_one_step,
                             rollout_predict)
from simam.model import EarlyStop, NodeConfig, validate_series
from simam.simulation import Gaussian, convergence_design, gen_ground_truth, simulate_series


class _Window:
    """Lagged rows and a target given separately (no single series has both)."""

    def __init__(self, lagged, target):
        self.lagged = np.asarray(lagged, dtype=float)
        self._target = np.asarray(target, dtype=float)
        self.T = self.lagged.shape[0]

    def target(self, j):
        return self._target


def test_paper_init_hand_example():
    # u~ = X^T (y - mean y) / T = (-0.5, 0.5): a magnitude tie, so the lower index is kept
    w = _Window([[1, 0], [0, 1]], [2, 4])
    np.testing.assert_allclose(paper_init(w, 1, 2), [-2 ** -0.5, 2 ** -0.5], atol=1e-15)
    np.testing.assert_array_equal(paper_init(w, 1, 1), [-1.0, 0.0])
    # break the tie and the second coordinate wins
    np.testing.assert_array_equal(paper_init(_Window([[1, 0], [0, 1.5]], [2, 4]), 1, 1), [0.0, 1.0])


def test_paper_init_full_sparsity_is_normalized_moment():
    rng = np.random.default_rng(4)
    X = validate_series(rng.standard_normal((50, 4)))
    y = X.target(2)
    u = X.lagged.T @ (y - y.mean()) / X.T
    np.testing.assert_allclose(paper_init(X, 2, 4), u / np.linalg.norm(u), atol=1e-15)


def test_paper_init_constant_column():
    raw = np.random.default_rng(0).standard_normal((10, 3))
    raw[:, 1] = 2.0
    with pytest.raises(InitDegenerate):
        paper_init(validate_series(raw), 1, 2)


def test_pgd_step_zero_step_and_fixed_point():
    rng = np.random.default_rng(2)
    X = validate_series(rng.standard_normal((20, 3)))
    u = np.array([0.6, 0.8, 0.0])
    out, degenerate = pgd_step(X, 0, u, 0.0, 2)
    np.testing.assert_allclose(out, u, atol=1e-15)
    assert not degenerate

    # target exactly isotonic in the current index: residual is zero
    u = np.array([0.6, 0.0, 0.8])
    lag = rng.standard_normal((10, 3))
    nxt = np.tanh(lag @ u)
    raw = np.vstack([lag, np.zeros(3)])
    raw[1:, 1] = nxt
    X = validate_series(raw)
    out, _ = pgd_step(X, 1, u, 0.5, 2)
    np.testing.assert_allclose(out, u, atol=1e-12)


def test_pgd_step_matches_reference():
    rng = np.random.default_rng(5)
    for _ in range(50):
        M = int(rng.integers(2, 5))
        X = validate_series(rng.standard_normal((int(rng.integers(3, 9)), M)))
        u = rng.standard_normal(M)
        u /= np.linalg.norm(u)
        s = int(rng.integers(1, M + 1))
        eta = float(rng.uniform(0.01, 2.0))
        j = int(rng.integers(M))
        got, degenerate = pgd_step(X, j, u, eta, s)
        if not degenerate:
            np.testing.assert_allclose(got, pgd_step_reference(X.data, j, u, eta, s), atol=1e-12)
    X = validate_series([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 2.0]])
    np.testing.assert_allclose(pgd_step(X, 1, [1.0, 0.0], 0.3, 2)[0],
                               pgd_step_reference(X.data, 1, np.array([1.0, 0.0]), 0.3, 2),
                               atol=1e-14)


def test_given_truth_on_noiseless_data_is_exact():
    truth = gen_ground_truth(5, 2, noise=Gaussian(0.0), seed=3)
    X, _ = simulate_series(truth, 200, seed=4)
    j = 2
    cfg = NodeConfig(sparsity=2, max_iters=3, init="given",
                     init_direction=tuple(truth.A_star[:, j]))
    _, _, diag = fit_node(X, j, cfg)
    assert diag.train_mse_history[0] == pytest.approx(0.0, abs=1e-28)


def test_fit_node_diagnostics_and_sparsity():
    design = convergence_design(0.05)
    _, X, _ = design.draw(1, T=300)
    cfg = NodeConfig(sparsity=4, step_size=0.1, max_iters=50)
    u, f, diag = fit_node(X, 0, cfg)
    assert np.count_nonzero(u) <= 4
    assert np.linalg.norm(u) == pytest.approx(1.0, abs=1e-12)
    assert diag.iterations_run == 50
    assert len(diag.train_mse_history) == 51
    assert diag.final_train_mse == pytest.approx(
        np.mean((X.target(0) - f(project_rows(X.lagged, u))) ** 2), abs=1e-12)


def test_fit_node_lasso_sparsity_and_early_stop():
    _, X, _ = convergence_design(0.05).draw(2, T=300)
    cfg = NodeConfig(sparsity=None, init="lasso", max_iters=200,
                     early_stop=EarlyStop(0.2, 10))
    u, _, diag = fit_node(X, 3, cfg)
    assert diag.sparsity_used >= 1
    assert np.count_nonzero(u) <= diag.sparsity_used
    assert diag.best_iteration is not None
    assert diag.best_iteration == int(np.argmin(diag.eval_mse_history))
    with pytest.raises(ConfigError):
        fit_node(X, 3, cfg, monitor=X)


def test_fit_network_reports_failed_nodes():
    raw = np.random.default_rng(0).standard_normal((20, 3))
    raw[:, 0] = 1.0
    raw[:, 2] = -1.0
    with pytest.raises(FitError) as info:
        fit_network(validate_series(raw), NodeConfig(sparsity=1, max_iters=2))
    assert info.value.nodes == [0, 2]


def test_fit_network_thread_count_does_not_change_result():
    _, X, _ = convergence_design(0.05).draw(3, T=200)
    cfg = NodeConfig(sparsity=4, max_iters=40)
    a = fit_network(X, cfg, threads=1)
    b = fit_network(X, cfg, threads=3)
    assert a.to_json() == b.to_json()


def test_predictions():
    _, X, _ = convergence_design(0.05).draw(4, T=200)
    model = fit_network(X, NodeConfig(sparsity=4, max_iters=20))
    pred = rollout_predict(model, X)
    assert pred.shape == (X.T, X.M)
    mse = np.mean((pred - X.responses) ** 2, axis=0)
    np.testing.assert_allclose(mse, [d.final_train_mse for d in model.diagnostics], atol=1e-12)
    # a training row reproduces its stored fit
    np.testing.assert_array_equal(predict_one_step(model, X.data[5]), pred[5])
    # far along the direction: the top fitted value
    far = predict_one_step(model, 1e6 * model.network[:, 0])
    assert far[0] == model.step_functions[0].values[-1]
    assert rollout_predict(model, validate_series(X.data[:2], min_transitions=1)).shape == (1, X.M)
    with pytest.raises(SizeError):
        predict_one_step(model, np.zeros(3))
