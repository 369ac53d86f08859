"""Linear comparison methods: VAR by least squares and the LASSO (coordinate descent + CV).

The LASSO works on internally standardized columns (mean 0, variance 1);
the penalty therefore applies to the standardized coefficients, and the
returned coefficients are mapped back to the original scale.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import ConditioningWarning, DomainError, FoldError
from .model import TimeSeriesMatrix


class ConvergenceWarning(UserWarning):
    """Coordinate descent hit its sweep limit before meeting the tolerance."""


def var_ols(X: TimeSeriesMatrix, jitter: float = 1e-10):
    """Regress every node on the previous row, with intercept.

    Returns ``(coef, intercept)`` where ``coef[:, j]`` holds the slopes of
    node ``j`` (same column convention as the SIMAM network).
    """
    Z = X.lagged
    Y = X.responses
    zbar = Z.mean(axis=0)
    ybar = Y.mean(axis=0)
    Zc = Z - zbar
    G = Zc.T @ Zc
    G[np.diag_indices_from(G)] += jitter
    if np.linalg.cond(G) > 1e12:
        warnings.warn("design is numerically rank deficient; returning the minimum-norm "
                      "least-squares solution", ConditioningWarning, stacklevel=2)
        coef = np.linalg.lstsq(Zc, Y - ybar, rcond=None)[0]
    else:
        coef = np.linalg.solve(G, Zc.T @ (Y - ybar))
    intercept = ybar - zbar @ coef
    return coef, intercept


def var_predict(coef, intercept, X: TimeSeriesMatrix) -> np.ndarray:
    return X.lagged @ coef + intercept


# --------------------------------------------------------------------------
# LASSO


@njit(cache=True, nogil=True)
def _cd(Xs, yc, lam, b, tol, max_sweeps):
    """Cyclic CD for (1/2n)||yc - Xs b||^2 + lam ||b||_1 with unit-variance columns."""
    n, p = Xs.shape
    r = yc - Xs @ b
    sweeps = 0
    max_delta = np.inf
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for k in range(p):
            old = b[k]
            rho = old
            acc = 0.0
            for i in range(n):
                acc += Xs[i, k] * r[i]
            rho += acc / n
            if rho > lam:
                new = rho - lam
            elif rho < -lam:
                new = rho + lam
            else:
                new = 0.0
            if new != old:
                d = new - old
                for i in range(n):
                    r[i] -= Xs[i, k] * d
                b[k] = new
                if abs(d) > max_delta:
                    max_delta = abs(d)
        if max_delta <= tol:
            break
    return b, sweeps, max_delta


@dataclass
class _Standardizer:
    mean: np.ndarray
    scale: np.ndarray  # 0 marks a constant column
    y_mean: float

    @classmethod
    def fit(cls, X, y):
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        return cls(mean, np.where(sd > 0, sd, 0.0), float(np.mean(y)))

    def transform(self, X):
        safe = np.where(self.scale > 0, self.scale, 1.0)
        Xs = (X - self.mean) / safe
        Xs[:, self.scale == 0] = 0.0
        return np.ascontiguousarray(Xs)

    def to_original(self, b):
        safe = np.where(self.scale > 0, self.scale, 1.0)
        coef = np.where(self.scale > 0, b / safe, 0.0)
        return coef, self.y_mean - float(self.mean @ coef)


def lasso_objective(Xs, yc, b, lam):
    r = yc - Xs @ b
    return float(r @ r) / (2 * len(yc)) + lam * float(np.abs(b).sum())


def lambda_max(X_design, y) -> float:
    X_design = np.asarray(X_design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    std = _Standardizer.fit(X_design, y)
    Xs = std.transform(X_design)
    return float(np.max(np.abs(Xs.T @ (y - std.y_mean))) / len(y))


def _check_design(X_design, y):
    X_design = np.asarray(X_design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X_design.ndim != 2 or y.ndim != 1 or X_design.shape[0] != y.size:
        raise DomainError(f"shape mismatch: design {X_design.shape}, response {y.shape}")
    if not (np.all(np.isfinite(X_design)) and np.all(np.isfinite(y))):
        raise DomainError("design and response must be finite")
    return X_design, y


def lasso_cd(X_design, y, lam, tol=1e-7, max_sweeps=10_000, b0=None):
    """Single-penalty LASSO; returns ``(coeffs, intercept)`` on the original scale."""
    X_design, y = _check_design(X_design, y)
    if not lam > 0:
        raise DomainError("lambda must be positive")
    std = _Standardizer.fit(X_design, y)
    Xs = std.transform(X_design)
    b = np.zeros(X_design.shape[1]) if b0 is None else np.array(b0, dtype=np.float64)
    b, sweeps, delta = _cd(Xs, y - std.y_mean, float(lam), b, tol, max_sweeps)
    if delta > tol:
        warnings.warn(f"LASSO did not converge in {sweeps} sweeps (last change {delta:.3g})",
                      ConvergenceWarning, stacklevel=2)
    return std.to_original(b)


def kkt_residual(X_design, y, coef, intercept, lam) -> float:
    """Largest violation of the LASSO optimality conditions on the standardized scale."""
    X_design, y = _check_design(X_design, y)
    std = _Standardizer.fit(X_design, y)
    Xs = std.transform(X_design)
    b = coef * np.where(std.scale > 0, std.scale, 0.0)
    r = (y - std.y_mean) - Xs @ b
    grad = Xs.T @ r / len(y)
    active = b != 0
    viol = np.where(active, np.abs(grad - lam * np.sign(b)), np.maximum(np.abs(grad) - lam, 0.0))
    viol[std.scale == 0] = 0.0
    return float(viol.max()) if viol.size else 0.0


@dataclass
class LassoPath:
    lambdas: np.ndarray
    coeffs: np.ndarray  # (n_lambdas, p)
    intercepts: np.ndarray
    cv_mean: Optional[np.ndarray] = None
    cv_sd: Optional[np.ndarray] = None
    selected: Optional[int] = None

    def __post_init__(self):
        if np.any(np.diff(self.lambdas) >= 0):
            raise DomainError("lambdas must be strictly decreasing")
        if not (len(self.lambdas) == len(self.coeffs) == len(self.intercepts)):
            raise DomainError("path arrays have inconsistent lengths")

    @property
    def selected_lambda(self) -> float:
        return float(self.lambdas[self.selected])

    @property
    def selected_coeffs(self) -> np.ndarray:
        return self.coeffs[self.selected]

    @property
    def selected_intercept(self) -> float:
        return float(self.intercepts[self.selected])

    def predict(self, X_new) -> np.ndarray:
        return np.asarray(X_new) @ self.selected_coeffs + self.selected_intercept


def lambda_grid(lam_max: float, n_lambdas: int = 50, ratio: float = 1e-3) -> np.ndarray:
    if lam_max <= 0:
        # null response: any positive grid gives the empty model
        lam_max = 1.0
    return np.geomspace(lam_max, lam_max * ratio, n_lambdas)


def lasso_path(X_design, y, lambdas, tol=1e-7, max_sweeps=10_000) -> LassoPath:
    """Warm-started path over a decreasing grid."""
    X_design, y = _check_design(X_design, y)
    std = _Standardizer.fit(X_design, y)
    Xs = std.transform(X_design)
    yc = y - std.y_mean
    b = np.zeros(X_design.shape[1])
    coeffs, intercepts = [], []
    for lam in lambdas:
        b, sweeps, delta = _cd(Xs, yc, float(lam), b.copy(), tol, max_sweeps)
        if delta > tol:
            warnings.warn(f"LASSO did not converge at lambda={lam:.3g}", ConvergenceWarning,
                          stacklevel=2)
        c, b0 = std.to_original(b)
        coeffs.append(c)
        intercepts.append(b0)
    return LassoPath(np.asarray(lambdas, dtype=np.float64), np.array(coeffs), np.array(intercepts))


def _folds(n, n_folds, scheme, seed):
    if scheme == "block":
        idx = np.arange(n)
    elif scheme == "kfold":
        idx = np.random.default_rng(seed).permutation(n)
    else:
        raise DomainError(f"unknown fold scheme {scheme!r}")
    return np.array_split(idx, n_folds)


def lasso_cv(X_design, y, n_lambdas=50, n_folds=5, seed=0, scheme="block",
             ratio=1e-3, tol=1e-7) -> LassoPath:
    """Cross-validated LASSO; contiguous time blocks by default.

    The λ grid is computed once on the full data and shared by every fold.
    """
    X_design, y = _check_design(X_design, y)
    if n_folds < 2:
        raise FoldError("need at least two folds")
    folds = _folds(len(y), n_folds, scheme, seed)
    if min(len(f) for f in folds) < 5:
        raise FoldError(f"fold with fewer than 5 rows ({len(y)} rows, {n_folds} folds)")
    lambdas = lambda_grid(lambda_max(X_design, y), n_lambdas, ratio)
    errors = np.empty((n_folds, len(lambdas)))
    for f, test in enumerate(folds):
        train = np.setdiff1d(np.arange(len(y)), test)
        path = lasso_path(X_design[train], y[train], lambdas, tol=tol)
        pred = X_design[test] @ path.coeffs.T + path.intercepts
        errors[f] = np.mean((pred - y[test, None]) ** 2, axis=0)
    full = lasso_path(X_design, y, lambdas, tol=tol)
    full.cv_mean = errors.mean(axis=0)
    full.cv_sd = errors.std(axis=0, ddof=1)
    full.selected = int(np.argmin(full.cv_mean))
    return full


def lasso_network(X: TimeSeriesMatrix, n_lambdas=50, n_folds=5, seed=0, scheme="block"):
    """Per-node CV LASSO on the lag-1 design. Returns ``(coef, intercept, paths)``."""
    paths = [lasso_cv(X.lagged, X.target(j), n_lambdas, n_folds, seed, scheme)
             for j in range(X.M)]
    coef = np.column_stack([p.selected_coeffs for p in paths])
    intercept = np.array([p.selected_intercept for p in paths])
    return coef, intercept, paths
