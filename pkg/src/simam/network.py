"""Structure analysis of a fitted network: or-symmetrization, spectral clustering, influence ranking."""
from __future__ import annotations

import numpy as np
from sklearn.cluster import KMeans

from .errors import DomainError


def _square(A, name="A_hat"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"{name} must be square, got shape {A.shape}")
    return A


def symmetrize_or(A_hat) -> np.ndarray:
    """Undirected 0/1 adjacency: an edge wherever either directed weight is strictly positive."""
    pos = _square(A_hat) > 0
    return (pos | pos.T).astype(np.int64)


def normalized_laplacian(adj) -> np.ndarray:
    """``I - D^-1/2 A D^-1/2``; rows of isolated nodes are identity rows."""
    A = _square(adj, "adj")
    deg = A.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])
    L = np.eye(A.shape[0]) - inv_sqrt[:, None] * A * inv_sqrt[None, :]
    return L


def laplacian_eigenpairs(adj):
    """Ascending eigenvalues and orthonormal eigenvectors (columns) of the normalized Laplacian."""
    return np.linalg.eigh(normalized_laplacian(adj))


def spectral_embed(adj, k: int):
    """Rows of the ``k`` bottom Laplacian eigenvectors, normalized to unit length.

    Returns ``(embedding, eigenvalues)``; isolated nodes embed at the origin.
    """
    A = _square(adj, "adj")
    M = A.shape[0]
    if not 1 <= k <= M:
        raise DomainError(f"k={k} must lie in [1, M={M}]")
    vals, vecs = laplacian_eigenpairs(A)
    emb = vecs[:, :k].copy()
    emb[A.sum(axis=1) == 0] = 0.0
    norms = np.linalg.norm(emb, axis=1)
    nz = norms > 0
    emb[nz] /= norms[nz, None]
    return emb, vals[:k]


def kmeans(points, K: int, seed: int = 0, restarts: int = 10):
    """k-means++ seeded Lloyd iterations; best of ``restarts`` runs.

    Returns ``(labels, inertia)``.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise DomainError("points must be a 2-D array")
    if K < 1 or K > X.shape[0]:
        raise DomainError(f"K={K} must lie in [1, {X.shape[0]}]")
    km = KMeans(n_clusters=K, init="k-means++", n_init=restarts, random_state=seed)
    labels = km.fit_predict(X)
    return labels.astype(np.int64), float(km.inertia_)


def spectral_cluster(A_hat, K: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """Or-symmetrize, embed with ``K`` eigenvectors, cluster the connected rows, then
    attach isolated nodes to the nearest centroid."""
    adj = symmetrize_or(A_hat)
    M = adj.shape[0]
    if not 1 <= K <= M:
        raise DomainError(f"K={K} must lie in [1, M={M}]")
    emb, _ = spectral_embed(adj, K)
    connected = adj.sum(axis=1) > 0
    labels = np.zeros(M, dtype=np.int64)
    n_conn = int(connected.sum())
    if n_conn == 0:
        return labels
    k_eff = min(K, n_conn)
    lab_c, _ = kmeans(emb[connected], k_eff, seed=seed, restarts=restarts)
    labels[connected] = lab_c
    if not connected.all():
        centroids = np.array([emb[connected][lab_c == c].mean(axis=0) for c in range(k_eff)])
        d = np.linalg.norm(emb[~connected][:, None, :] - centroids[None], axis=2)
        labels[~connected] = np.argmin(d, axis=1)
    return labels


def influence_ranking(A_hat):
    """Nodes by descending row sum (total outgoing influence); ties keep index order."""
    sums = _square(A_hat).sum(axis=1)
    order = sorted(range(len(sums)), key=lambda i: (-sums[i], i))
    return [(i, float(sums[i])) for i in order]
