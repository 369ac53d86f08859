"""Simulation studies: error-vs-T convergence and SIMAM-vs-LASSO prediction traces."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import baselines
from .errors import SimamError
from .estimator import fit_network
from .model import NodeConfig, validate_series
from .simulation import Design
from .stats import network_rmse, paired_t_test

log = logging.getLogger(__name__)

METRICS = (
    "network_rmse",
    "simam_train_mse",
    "simam_test_mse",
    "lasso_train_mse",
    "lasso_test_mse",
)

CSV_FIELDS = ("experiment", "x", "metric", "mean", "sd", "n")


@dataclass
class ExperimentReport:
    """Long-format results: one ``(experiment, x, metric)`` summary per row."""

    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, experiment, x, metric, values):
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        values = np.asarray(values, dtype=np.float64)
        if values.size < 1:
            raise ValueError("need at least one replicate value")
        self.rows.append({
            "experiment": experiment,
            "x": x,
            "metric": metric,
            "mean": float(values.mean()),
            "sd": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "n": int(values.size),
        })

    def select(self, metric, experiment=None):
        return [r for r in self.rows
                if r["metric"] == metric and (experiment is None or r["experiment"] == experiment)]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
            w.writeheader()
            for r in self.rows:
                w.writerow({k: ("" if r[k] is None else
                                format(r[k], ".17g") if isinstance(r[k], float) else r[k])
                            for k in CSV_FIELDS})

    def to_dict(self):
        return {"metadata": self.metadata, "rows": self.rows}

    def write_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")


def design_digest(design: Design, **extra) -> str:
    d = dataclasses.asdict(design)
    d["noise"] = design.noise.to_dict()
    d.update(extra)
    return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _seeds_for(master_seed: int, key: int, n: int) -> list:
    ss = np.random.SeedSequence([master_seed, key])
    return [int(c.generate_state(1, np.uint64)[0]) for c in ss.spawn(n)]


def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


# --------------------------------------------------------------------------
# convergence


def _convergence_job(job):
    design, T, seed = job
    truth, X, _ = design.draw(seed, T=T)
    cfg = NodeConfig(sparsity=design.sparsity, step_size=design.step_size,
                     max_iters=design.max_iters)
    try:
        model = fit_network(X, cfg)
    except SimamError as exc:
        return None, f"{type(exc).__name__}: {exc}"
    return network_rmse(model.network, truth.A_star), None


def fit_rate(T_values, errors) -> Optional[dict]:
    """Slope of log(error) on log(T) and R^2 of error against T^(-1/3).

    Returns ``None`` when fewer than two distinct T are available.
    """
    T_values = np.asarray(T_values, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if np.unique(T_values).size < 2:
        return None

    def linfit(x, y):
        slope, icpt = np.polyfit(x, y, 1)
        resid = y - (slope * x + icpt)
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
        return float(slope), float(icpt), r2

    slope, icpt, r2_log = linfit(np.log(T_values), np.log(errors))
    c_slope, c_icpt, r2_c = linfit(T_values ** (-1.0 / 3.0), errors)
    return {
        "loglog_slope": slope,
        "loglog_intercept": icpt,
        "loglog_r2": r2_log,
        "cuberoot_slope": c_slope,
        "cuberoot_intercept": c_icpt,
        "cuberoot_r2": r2_c,
    }


def convergence_study(design: Design, T_grid, replicates: int, seed: int = 0,
                      workers: int = 1):
    """Mean network RMSE over replicates for each ``T``; returns ``(report, rate_fit)``."""
    T_grid = [int(T) for T in T_grid]
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    if T_grid != sorted(T_grid):
        raise ValueError("T_grid must be ascending")
    t0 = time.time()
    jobs = [(design, T, s) for T in T_grid for s in _seeds_for(seed, T, replicates)]
    results = _map(_convergence_job, jobs, workers)

    report = ExperimentReport()
    means, Ts, failures = [], [], {}
    for i, T in enumerate(T_grid):
        chunk = results[i * replicates:(i + 1) * replicates]
        errs = [e for e, fail in chunk if fail is None]
        failures[T] = [fail for _, fail in chunk if fail is not None]
        if errs:
            report.add("convergence", T, "network_rmse", errs)
            Ts.append(T)
            means.append(float(np.mean(errs)))
    rate = fit_rate(Ts, means)
    report.metadata = {
        "seed": seed,
        "replicates": replicates,
        "T_grid": T_grid,
        "design_digest": design_digest(design),
        "failed_replicates": {str(T): len(f) for T, f in failures.items()},
        "rate_fit": rate,
        "wall_time_s": round(time.time() - t0, 3),
    }
    return report, rate


# --------------------------------------------------------------------------
# prediction


def _prediction_job(job):
    design, seed, K, train_frac, n_folds = job
    truth, X, _ = design.draw(seed)
    n_train = int(round(X.T * train_frac))
    train = X.head(n_train + 1)
    test = validate_series(X.data[n_train:], min_transitions=1)

    lasso_coef, lasso_icpt, paths = baselines.lasso_network(train, n_folds=n_folds, seed=seed)
    lasso_train = float(np.mean((train.lagged @ lasso_coef + lasso_icpt - train.responses) ** 2))
    lasso_test = float(np.mean((test.lagged @ lasso_coef + lasso_icpt - test.responses) ** 2))

    cfg = NodeConfig(sparsity=design.sparsity, step_size=design.step_size, max_iters=K,
                     init="lasso", lasso_folds=n_folds)
    try:
        model = fit_network(train, cfg, rng_seed=seed, monitor=test, lasso_paths=paths)
    except SimamError as exc:
        return {"failure": f"{type(exc).__name__}: {exc}"}
    train_curve = np.mean([d.train_mse_history for d in model.diagnostics], axis=0)
    test_curve = np.mean([d.eval_mse_history for d in model.diagnostics], axis=0)
    return {
        "failure": None,
        "train_curve": train_curve,
        "test_curve": test_curve,
        "lasso_train": lasso_train,
        "lasso_test": lasso_test,
        "network_rmse": network_rmse(model.network, truth.A_star),
        "lasso_support": int(np.count_nonzero(lasso_coef)),
    }


def prediction_study(design: Design, replicates: int, seed: int = 0, max_iters: int = 300,
                     train_frac: float = 0.9, n_folds: int = 5, workers: int = 1,
                     name: str = "prediction"):
    """SIMAM (LASSO warm start) against the per-node CV LASSO on a train/test split.

    Returns ``(report, outcomes)`` where ``outcomes`` holds one dict per
    successful replicate (final SIMAM and LASSO MSEs).
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    t0 = time.time()
    seeds = _seeds_for(seed, design.T, replicates)
    results = _map(_prediction_job, [(design, s, max_iters, train_frac, n_folds) for s in seeds],
                   workers)
    ok = [r for r in results if r["failure"] is None]
    report = ExperimentReport()
    outcomes = [{
        "simam_test": float(r["test_curve"][-1]),
        "simam_train": float(r["train_curve"][-1]),
        "lasso_test": r["lasso_test"],
        "lasso_train": r["lasso_train"],
        "network_rmse": r["network_rmse"],
    } for r in ok]
    if ok:
        train = np.array([r["train_curve"] for r in ok])
        test = np.array([r["test_curve"] for r in ok])
        for k in range(train.shape[1]):
            report.add(name, k, "simam_train_mse", train[:, k])
            report.add(name, k, "simam_test_mse", test[:, k])
        report.add(name, None, "lasso_train_mse", [r["lasso_train"] for r in ok])
        report.add(name, None, "lasso_test_mse", [r["lasso_test"] for r in ok])
        report.add(name, None, "network_rmse", [r["network_rmse"] for r in ok])
    ttest = None
    if len(ok) >= 2:
        try:
            t, p, n = paired_t_test([o["simam_test"] for o in outcomes],
                                    [o["lasso_test"] for o in outcomes], "less")
            ttest = {"t": t, "p_value": p, "n": n, "alternative": "less"}
        except SimamError:
            ttest = None
    report.metadata = {
        "seed": seed,
        "replicates": replicates,
        "max_iters": max_iters,
        "train_frac": train_frac,
        "design_digest": design_digest(design, max_iters=max_iters, train_frac=train_frac),
        "failed_replicates": len(results) - len(ok),
        "failures": [r["failure"] for r in results if r["failure"] is not None],
        "simam_beats_lasso": sum(o["simam_test"] < o["lasso_test"] for o in outcomes),
        "paired_t_test_test_mse": ttest,
        "wall_time_s": round(time.time() - t0, 3),
    }
    return report, outcomes
