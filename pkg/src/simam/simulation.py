"""Synthetic SIMAM series with known ground truth.

Random numbers come from numpy's ``PCG64`` bit generator; replicate streams
are derived with ``SeedSequence`` spawning, so a (seed, replicate) pair
always maps to the same stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .core_math import project_rows
from .errors import DomainError, SizeError
from .model import MonotoneStepFunction, TimeSeriesMatrix, validate_series


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def replicate_seeds(master_seed: int, n: int) -> list:
    """Independent child seeds for ``n`` replicates of a master seed."""
    return [int(c.generate_state(1, np.uint64)[0])
            for c in np.random.SeedSequence(master_seed).spawn(n)]


def scaled_logistic(j, x):
    """``exp(j x) / (exp(j x) + 1)`` evaluated without overflow."""
    x = np.asarray(x, dtype=np.float64)
    jx = j * x
    out = np.empty_like(jx)
    pos = jx >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-jx[pos]))
    e = np.exp(jx[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Gaussian:
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")

    def draw(self, rng, shape):
        return self.sigma * rng.standard_normal(shape)

    def to_dict(self):
        return {"kind": "gaussian", "scale": self.sigma}


@dataclass(frozen=True)
class Uniform:
    a: float

    def __post_init__(self):
        if self.a < 0:
            raise DomainError("a must be >= 0")

    def draw(self, rng, shape):
        return rng.uniform(-self.a, self.a, shape)

    def to_dict(self):
        return {"kind": "uniform", "scale": self.a}


Noise = Union[Gaussian, Uniform]


def parse_noise(spec: str) -> Noise:
    """``"gaussian:0.05"`` or ``"uniform:0.1"``."""
    kind, _, value = spec.partition(":")
    try:
        scale = float(value)
    except ValueError:
        raise DomainError(f"bad noise spec {spec!r}") from None
    if kind == "gaussian":
        return Gaussian(scale)
    if kind == "uniform":
        return Uniform(scale)
    raise DomainError(f"unknown noise kind {kind!r}")


def noise_from_dict(d) -> Noise:
    return Gaussian(d["scale"]) if d["kind"] == "gaussian" else Uniform(d["scale"])


@dataclass(frozen=True)
class GroundTruth:
    A_star: np.ndarray
    links: tuple  # per node: int (scaled-logistic index) or MonotoneStepFunction
    noise: Noise
    s_star: int

    @property
    def M(self) -> int:
        return self.A_star.shape[0]

    def link(self, j, x):
        lk = self.links[j]
        if isinstance(lk, MonotoneStepFunction):
            return lk(x)
        return scaled_logistic(lk, x)

    def conditional_mean(self, rows) -> np.ndarray:
        rows = np.atleast_2d(rows)
        return np.column_stack([
            self.link(j, project_rows(rows, np.ascontiguousarray(self.A_star[:, j])))
            for j in range(self.M)
        ])

    def to_dict(self) -> dict:
        if not all(isinstance(lk, (int, np.integer)) for lk in self.links):
            raise DomainError("only scaled-logistic links are serializable")
        return {
            "A_star": self.A_star.tolist(),
            "links": {"family": "scaled-logistic", "index": [int(l) for l in self.links]},
            "noise": self.noise.to_dict(),
            "s_star": self.s_star,
        }

    @classmethod
    def from_dict(cls, d) -> "GroundTruth":
        return cls(np.array(d["A_star"], dtype=np.float64), tuple(d["links"]["index"]),
                   noise_from_dict(d["noise"]), int(d["s_star"]))


def gen_ground_truth(M: int, s_star: int, links: Sequence = None, noise: Noise = Gaussian(0.05),
                     seed=0) -> GroundTruth:
    """Random unit columns with exactly ``s_star`` nonzeros (uniform support, normal values).

    ``links`` defaults to scaled-logistic indices ``1..M``.
    """
    if not 1 <= s_star <= M:
        raise DomainError(f"s_star={s_star} must lie in [1, M={M}]")
    links = tuple(range(1, M + 1)) if links is None else tuple(links)
    if len(links) != M:
        raise DomainError("need one link per node")
    rng = make_rng(seed)
    A = np.zeros((M, M))
    for j in range(M):
        support = rng.choice(M, size=s_star, replace=False)
        vals = rng.standard_normal(s_star)
        while not np.any(vals):
            vals = rng.standard_normal(s_star)
        A[support, j] = vals / np.linalg.norm(vals)
    return GroundTruth(A, links, noise, s_star)


def simulate_series(truth: GroundTruth, T: int, seed=0):
    """Run the recursion for ``T`` transitions.  Returns ``(X, Z)`` with ``Z[0] = 0``."""
    if T < 2:
        raise SizeError("T must be >= 2")
    rng = make_rng(seed)
    M = truth.M
    X = np.empty((T + 1, M))
    X[0] = rng.standard_normal(M)
    Z = np.zeros((T + 1, M))
    Z[1:] = truth.noise.draw(rng, (T, M))
    for t in range(T):
        X[t + 1] = truth.conditional_mean(X[t])[0] + Z[t + 1]
    return validate_series(X), Z


@dataclass(frozen=True)
class Design:
    """A simulation design: sizes, links and noise, plus the matching fit settings."""

    M: int = 9
    s_star: int = 3
    T: int = 1000
    noise: Noise = field(default_factory=lambda: Gaussian(0.05))
    links: tuple = None
    sparsity: int = 4
    step_size: float = 0.1
    max_iters: int = 2000

    def link_indices(self) -> tuple:
        return tuple(range(1, self.M + 1)) if self.links is None else tuple(self.links)

    def draw(self, seed, T=None):
        """Ground truth and series for one replicate seed."""
        gt_seed, series_seed = np.random.SeedSequence(seed).spawn(2)
        truth = gen_ground_truth(self.M, self.s_star, self.link_indices(), self.noise, gt_seed)
        X, Z = simulate_series(truth, self.T if T is None else T, series_seed)
        return truth, X, Z


def convergence_design(sigma=0.05) -> Design:
    return Design(M=9, s_star=3, noise=Gaussian(sigma), links=tuple(range(1, 10)),
                  sparsity=4, step_size=0.1, max_iters=2000)


def sim9_design(noise: Noise = Gaussian(0.05)) -> Design:
    return Design(M=9, s_star=3, T=1000, noise=noise, links=tuple(range(2, 11)),
                  sparsity=4, step_size=0.01)


def sim36_design(noise: Noise = Gaussian(0.05)) -> Design:
    return Design(M=36, s_star=6, T=1000, noise=noise,
                  links=tuple(j % 9 + 1 for j in range(1, 37)), sparsity=8, step_size=0.01)
