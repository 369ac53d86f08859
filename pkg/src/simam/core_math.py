"""Order-restricted regression and sparse projection primitives.

The heavy lifting lives in small numba kernels (``_pava``, ``_iso``,
``_hard_threshold``) so that the estimator loop can call them without
crossing back into Python.  The public wrappers validate their inputs and
reject NaN at the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DegenerateDirection, DomainError

__all__ = [
    "WeightedSequence",
    "InducedOrdering",
    "pava",
    "induced_ordering",
    "iso_wrt",
    "hard_threshold",
    "orth_project",
    "sparse_normalize",
    "project_rows",
]


def _as_finite_vector(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class WeightedSequence:
    values: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        values = _as_finite_vector(self.values, "values")
        if self.weights is None:
            weights = np.ones_like(values)
        else:
            weights = _as_finite_vector(self.weights, "weights")
        if weights.shape != values.shape:
            raise DomainError("values and weights must have equal length")
        if np.any(weights <= 0):
            raise DomainError("weights must be strictly positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class InducedOrdering:
    """Stable sort of a reference vector.

    ``tie_groups`` holds ``(start, stop)`` slices into ``permutation`` whose
    reference values are exactly equal; only groups of two or more appear.
    """

    permutation: np.ndarray
    tie_groups: list

    def sorted_groups(self):
        """All groups in sorted order, singletons included."""
        n = self.permutation.size
        out, pos = [], 0
        for start, stop in self.tie_groups:
            out.extend((i, i + 1) for i in range(pos, start))
            out.append((start, stop))
            pos = stop
        out.extend((i, i + 1) for i in range(pos, n))
        return out


# --------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def _pava(y, w):
    n = y.size
    sums = np.empty(n)
    wts = np.empty(n)
    counts = np.empty(n, np.int64)
    b = 0
    for i in range(n):
        sums[b] = w[i] * y[i]
        wts[b] = w[i]
        counts[b] = 1
        while b > 0 and sums[b - 1] / wts[b - 1] > sums[b] / wts[b]:
            sums[b - 1] += sums[b]
            wts[b - 1] += wts[b]
            counts[b - 1] += counts[b]
            b -= 1
        b += 1
    out = np.empty(n)
    k = 0
    for i in range(b):
        m = sums[i] / wts[i]
        for _ in range(counts[i]):
            out[k] = m
            k += 1
    return out


@njit(cache=True, nogil=True)
def _iso(ref, y):
    """Isotonic fit of ``y`` w.r.t. the order induced by ``ref``.

    Returns ``(order, fit_sorted)`` where ``fit_sorted[i]`` is the fitted value
    at original position ``order[i]``.
    """
    n = ref.size
    order = np.argsort(ref, kind="mergesort")
    pooled = np.empty(n)
    weights = np.empty(n)
    starts = np.empty(n + 1, np.int64)
    g = 0
    i = 0
    while i < n:
        j = i
        acc = 0.0
        r = ref[order[i]]
        while j < n and ref[order[j]] == r:
            acc += y[order[j]]
            j += 1
        starts[g] = i
        pooled[g] = acc / (j - i)
        weights[g] = j - i
        g += 1
        i = j
    starts[g] = n
    fit_groups = _pava(pooled[:g], weights[:g])
    fit_sorted = np.empty(n)
    for k in range(g):
        for p in range(starts[k], starts[k + 1]):
            fit_sorted[p] = fit_groups[k]
    return order, fit_sorted


@njit(cache=True, nogil=True)
def _hard_threshold(v, s):
    order = np.argsort(-np.abs(v), kind="mergesort")
    out = np.zeros_like(v)
    for i in range(s):
        out[order[i]] = v[order[i]]
    return out


@njit(cache=True, nogil=True)
def _project_rows(X, u):
    # plain left-to-right dot per row; fitting and prediction must agree bitwise
    n, m = X.shape
    out = np.empty(n)
    for t in range(n):
        acc = 0.0
        for i in range(m):
            acc += X[t, i] * u[i]
        out[t] = acc
    return out


# --------------------------------------------------------------------------
# public surface


def pava(values, weights=None):
    """Weighted L2 projection onto the non-decreasing cone (pool adjacent violators).

    Accepts either a :class:`WeightedSequence` or raw arrays.
    """
    seq = values if isinstance(values, WeightedSequence) else WeightedSequence(values, weights)
    if len(seq) == 0:
        raise DomainError("pava needs at least one value")
    return _pava(seq.values, seq.weights)


def induced_ordering(reference):
    z = _as_finite_vector(reference, "reference")
    if z.size == 0:
        raise DomainError("reference must be non-empty")
    perm = np.argsort(z, kind="stable")
    zs = z[perm]
    groups = []
    i, n = 0, z.size
    while i < n:
        j = i + 1
        while j < n and zs[j] == zs[i]:
            j += 1
        if j - i > 1:
            groups.append((i, j))
        i = j
    return InducedOrdering(permutation=perm, tie_groups=groups)


def iso_wrt(reference, values):
    """Least-squares fit of ``values`` that is non-decreasing in ``reference``.

    Entries with equal reference value are forced to share one fitted value.
    """
    z = _as_finite_vector(reference, "reference")
    v = _as_finite_vector(values, "values")
    if z.size != v.size:
        raise DomainError(f"length mismatch: reference {z.size} vs values {v.size}")
    if z.size == 0:
        raise DomainError("iso_wrt needs at least one value")
    order, fit_sorted = _iso(z, v)
    out = np.empty_like(v)
    out[order] = fit_sorted
    return out


def hard_threshold(v, s):
    """Keep the ``s`` largest-magnitude entries; magnitude ties go to the lower index."""
    x = _as_finite_vector(v, "v")
    s = int(s)
    if s < 1 or s > x.size:
        raise DomainError(f"sparsity s={s} outside [1, {x.size}]")
    return _hard_threshold(x, s)


def orth_project(u, x):
    """Component of ``x`` orthogonal to ``u``."""
    u = _as_finite_vector(u, "u")
    x = _as_finite_vector(x, "x")
    if u.shape != x.shape:
        raise DomainError("u and x must have equal length")
    uu = float(u @ u)
    if uu == 0.0:
        raise DomainError("cannot project orthogonally to the zero vector")
    return x - (float(u @ x) / uu) * u


def sparse_normalize(v, s):
    kept = hard_threshold(v, s)
    nrm = np.linalg.norm(kept)
    if nrm == 0.0:
        raise DegenerateDirection("thresholded vector is zero")
    return kept / nrm


def project_rows(X, u):
    """``X @ u`` with a fixed summation order (bit-stable across call sites)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    if X.ndim != 2 or u.ndim != 1 or X.shape[1] != u.size:
        raise DomainError(f"shape mismatch: X {X.shape}, u {u.shape}")
    return _project_rows(X, u)
