"""Alternating isotonic regression / sparse pseudo-gradient descent for monotone SIMAM.

Each node ``j`` is fitted on its own: the link is the isotonic fit of
``X[1:, j]`` against the current index ``X[:-1] @ u``, and ``u`` moves along
the residual correlation projected orthogonally to itself, followed by hard
thresholding and renormalization.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from . import baselines
from .core_math import _hard_threshold, _iso, _project_rows, orth_project, project_rows, \
    iso_wrt, sparse_normalize
from .errors import ConfigError, DegenerateDirection, DomainError, FitError, InitDegenerate, \
    SizeError
from .model import FittedModel, MonotoneStepFunction, NodeConfig, NodeDiagnostics, \
    TimeSeriesMatrix, data_stats

log = logging.getLogger(__name__)

__all__ = [
    "paper_init",
    "lasso_init",
    "pgd_step",
    "fit_node",
    "fit_network",
    "predict_one_step",
    "rollout_predict",
]


def paper_init(X: TimeSeriesMatrix, j: int, s: int) -> np.ndarray:
    """Thresholded, normalized covariance between the lagged rows and the centered target."""
    y = X.target(j)
    u_tilde = X.lagged.T @ (y - y.mean()) / X.T
    try:
        return sparse_normalize(u_tilde, s)
    except DegenerateDirection as exc:
        raise InitDegenerate(f"node {j}: moment initializer is zero") from exc


def lasso_init(X: TimeSeriesMatrix, j: int, s: int, path=None, **cv_kwargs) -> np.ndarray:
    """Warm start from the CV-selected LASSO coefficients; falls back to :func:`paper_init`."""
    if path is None:
        path = baselines.lasso_cv(X.lagged, X.target(j), **cv_kwargs)
    beta = path.selected_coeffs
    if not np.any(beta):
        return paper_init(X, j, s)
    return sparse_normalize(beta, s)


def pgd_step(X: TimeSeriesMatrix, j: int, u_prev, eta: float, s: int):
    """One pseudo-gradient step.  Returns ``(u_next, degenerate)``.

    A degenerate step (thresholded update is zero) keeps ``u_prev``.
    """
    u_prev = np.asarray(u_prev, dtype=np.float64)
    Xl = X.lagged
    y = X.target(j)
    r = y - iso_wrt(project_rows(Xl, u_prev), y)
    g = Xl.T @ r / X.T
    u_tilde = u_prev + eta * orth_project(u_prev, g)
    try:
        return sparse_normalize(u_tilde, s), False
    except DegenerateDirection:
        return u_prev, True


@njit(cache=True, nogil=True)
def _alternate(Xl, y, u0, eta, s, K, Xe, ye, patience, record):
    T, M = Xl.shape
    u = u0.copy()
    mse_hist = np.empty(K + 1)
    norm_hist = np.empty(K + 1)
    n_eval = Xe.shape[0]
    eval_hist = np.empty(K + 1 if n_eval > 0 else 0)
    iterates = np.empty((K + 1 if record else 0, M))
    best_u = u.copy()
    best_eval = np.inf
    best_k = 0
    since_best = 0
    degenerate = 0
    norm_hist[0] = np.sqrt(np.sum(u * u))
    r = np.empty(T)
    k = 0
    while True:
        if record:
            iterates[k] = u
        z = _project_rows(Xl, u)
        order, fit_sorted = _iso(z, y)
        sse = 0.0
        for i in range(T):
            d = y[order[i]] - fit_sorted[i]
            r[order[i]] = d
            sse += d * d
        mse_hist[k] = sse / T
        if n_eval > 0:
            zs = np.empty(T)
            for i in range(T):
                zs[i] = z[order[i]]
            ze = _project_rows(Xe, u)
            pos = np.searchsorted(zs, ze)
            esse = 0.0
            for i in range(n_eval):
                p = pos[i] if pos[i] < T else T - 1
                d = ye[i] - fit_sorted[p]
                esse += d * d
            ev = esse / n_eval
            eval_hist[k] = ev
            if ev < best_eval:
                best_eval = ev
                best_k = k
                best_u[:] = u
                since_best = 0
            else:
                since_best += 1
            if patience > 0 and since_best >= patience:
                break
        if k == K:
            break
        # pseudo-gradient, orthogonal to the current direction
        g = np.zeros(M)
        for t in range(T):
            rt = r[t]
            for m in range(M):
                g[m] += Xl[t, m] * rt
        g /= T
        ug = 0.0
        uu = 0.0
        for m in range(M):
            ug += u[m] * g[m]
            uu += u[m] * u[m]
        u_tilde = u + eta * (g - (ug / uu) * u)
        kept = _hard_threshold(u_tilde, s)
        nrm = np.sqrt(np.sum(kept * kept))
        k += 1
        norm_hist[k] = np.sqrt(np.sum(u_tilde * u_tilde))
        if nrm == 0.0:
            degenerate += 1
        else:
            u = kept / nrm
    n_run = k
    return (u, n_run, mse_hist[: n_run + 1], norm_hist[: n_run + 1],
            eval_hist[: n_run + 1] if n_eval > 0 else eval_hist,
            iterates[: n_run + 1] if record else iterates,
            degenerate, best_k, best_u)


def _step_function(Xl, y, u):
    order, fit_sorted = _iso(_project_rows(Xl, u), y)
    z_sorted = _project_rows(Xl, u)[order]
    f = MonotoneStepFunction.from_fit(z_sorted, fit_sorted)
    resid = y[order] - fit_sorted
    return f, float(resid @ resid) / len(y)


def _resolve_sparsity(X, j, cfg, rng_seed, path=None):
    s = cfg.sparsity
    if path is None and (s is None or cfg.init == "lasso"):
        path = baselines.lasso_cv(X.lagged, X.target(j), n_lambdas=cfg.lasso_lambdas,
                                  n_folds=cfg.lasso_folds, seed=rng_seed)
    if s is None:
        s = max(1, int(np.count_nonzero(path.selected_coeffs)))
    return int(s), path


def fit_node(X: TimeSeriesMatrix, j: int, cfg: NodeConfig, rng_seed: int = 0,
             monitor: TimeSeriesMatrix | None = None, record_iterates: bool = False,
             lasso_path=None):
    """Fit direction and link for node ``j``.

    ``monitor`` is an optional extra window whose one-step MSE is traced at
    every iterate (never used for stopping).  ``lasso_path`` reuses an
    already cross-validated LASSO fit of this node.  Returns
    ``(u_hat, step_function, NodeDiagnostics)``.
    """
    if not 0 <= j < X.M:
        raise DomainError(f"node index {j} outside [0, {X.M})")
    cfg.check(X.M)
    s, path = _resolve_sparsity(X, j, cfg, rng_seed, lasso_path)

    try:
        if cfg.init == "paper":
            u0 = paper_init(X, j, s)
        elif cfg.init == "lasso":
            u0 = lasso_init(X, j, s, path=path)
        else:
            u0 = sparse_normalize(np.asarray(cfg.init_direction), s)
    except DegenerateDirection as exc:
        raise FitError([j], {j: str(exc)}) from exc

    Xl, y = X.lagged, np.ascontiguousarray(X.target(j))
    patience = 0
    if cfg.early_stop is not None:
        if monitor is not None:
            raise ConfigError("monitor and early_stop cannot be combined")
        n_fit = int(round(X.T * (1.0 - cfg.early_stop.validation_fraction)))
        if n_fit < 2 or X.T - n_fit < 1:
            raise SizeError("training window too short for the early-stopping split")
        fit_X, fit_y = Xl[:n_fit], y[:n_fit]
        Xe, ye = Xl[n_fit:], y[n_fit:]
        patience = cfg.early_stop.patience
    else:
        fit_X, fit_y = Xl, y
        if monitor is not None:
            if monitor.M != X.M:
                raise SizeError("monitor window has a different number of nodes")
            Xe, ye = monitor.lagged, monitor.target(j)
        else:
            Xe, ye = np.empty((0, X.M)), np.empty(0)

    (u, n_run, mse_hist, norm_hist, eval_hist, iterates, degenerate, best_k,
     best_u) = _alternate(np.ascontiguousarray(fit_X), np.ascontiguousarray(fit_y), u0,
                          float(cfg.step_size), s, int(cfg.max_iters),
                          np.ascontiguousarray(Xe), np.ascontiguousarray(ye), patience,
                          record_iterates)
    if degenerate:
        log.info("node %d: %d degenerate steps kept the previous iterate", j, degenerate)

    best_iteration = None
    if cfg.early_stop is not None:
        u = best_u
        best_iteration = int(best_k)
    f, train_mse = _step_function(Xl, y, u)
    diag = NodeDiagnostics(
        iterations_run=int(n_run),
        final_train_mse=train_mse,
        train_mse_history=mse_hist.tolist(),
        iterate_norm_history=norm_hist.tolist(),
        degenerate_steps=int(degenerate),
        sparsity_used=s,
        best_iteration=best_iteration,
        eval_mse_history=eval_hist.tolist() if len(eval_hist) else None,
        iterates=iterates if record_iterates else None,
    )
    return u, f, diag


def fit_network(X: TimeSeriesMatrix, cfgs, rng_seed: int = 0, threads: int = 1,
                monitor: TimeSeriesMatrix | None = None,
                record_iterates: bool = False, lasso_paths=None) -> FittedModel:
    """Fit every node independently and assemble the network (column ``j`` = node ``j``)."""
    if isinstance(cfgs, NodeConfig):
        cfgs = [cfgs] * X.M
    cfgs = list(cfgs)
    if len(cfgs) != X.M:
        raise ConfigError(f"expected {X.M} node configs, got {len(cfgs)}")

    def one(j):
        try:
            return fit_node(X, j, cfgs[j], rng_seed, monitor=monitor,
                            record_iterates=record_iterates,
                            lasso_path=None if lasso_paths is None else lasso_paths[j])
        except FitError as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(X.M)))
    else:
        results = [one(j) for j in range(X.M)]

    failed = {j: r.causes.get(j, str(r)) for j, r in enumerate(results) if isinstance(r, FitError)}
    if failed:
        raise FitError(sorted(failed), failed)
    network = np.column_stack([r[0] for r in results])
    return FittedModel(
        network=network,
        step_functions=[r[1] for r in results],
        diagnostics=[r[2] for r in results],
        config=cfgs,
        data_stats=data_stats(X),
    )


def predict_one_step(model: FittedModel, x_t) -> np.ndarray:
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.shape != (model.M,):
        raise SizeError(f"expected a length-{model.M} row, got shape {x_t.shape}")
    return rollout_predict_rows(model, x_t[None, :])[0]


def rollout_predict_rows(model: FittedModel, rows) -> np.ndarray:
    """Predict the next row for every row of ``rows``."""
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.M:
        raise SizeError(f"expected rows with {model.M} columns, got shape {rows.shape}")
    out = np.empty(rows.shape)
    for j, f in enumerate(model.step_functions):
        out[:, j] = f(project_rows(rows, np.ascontiguousarray(model.network[:, j])))
    return out


def rollout_predict(model: FittedModel, X_test: TimeSeriesMatrix) -> np.ndarray:
    """Teacher-forced one-step predictions of rows 1..T of ``X_test``."""
    return rollout_predict_rows(model, X_test.lagged)
