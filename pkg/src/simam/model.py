"""Data model: observation matrix, fitted step functions, node configs, fitted networks."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError, IngestError, SchemaError, SizeError

SCHEMA_VERSION = 1

INIT_CHOICES = ("paper", "lasso", "given")


@dataclass(frozen=True)
class TimeSeriesMatrix:
    """Observations ``X`` with ``T + 1`` rows (time 0..T) and ``M`` columns (nodes)."""

    data: np.ndarray

    @property
    def T(self) -> int:
        return self.data.shape[0] - 1

    @property
    def M(self) -> int:
        return self.data.shape[1]

    @property
    def lagged(self) -> np.ndarray:
        """Rows 0..T-1: the predictors of every transition."""
        return self.data[:-1]

    @property
    def responses(self) -> np.ndarray:
        """Rows 1..T."""
        return self.data[1:]

    def target(self, j: int) -> np.ndarray:
        return self.data[1:, j]

    def head(self, n_rows: int) -> "TimeSeriesMatrix":
        return validate_series(self.data[:n_rows])

    def tail(self, start: int) -> "TimeSeriesMatrix":
        return validate_series(self.data[start:])


def validate_series(raw, min_transitions: int = 2) -> TimeSeriesMatrix:
    """Check shape and finiteness and wrap ``raw`` as a :class:`TimeSeriesMatrix`.

    ``min_transitions`` defaults to 2 (T >= 2); prediction windows pass 1.
    """
    data = np.array(raw, dtype=np.float64, copy=True)
    if data.ndim != 2:
        raise SizeError(f"expected a 2-D matrix, got shape {data.shape}")
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        r, c = bad[0]
        raise IngestError(int(r), int(c))
    if data.shape[1] < 1 or data.shape[0] - 1 < min_transitions:
        raise SizeError(
            f"need at least {min_transitions + 1} rows and 1 column, got {data.shape}"
        )
    data.setflags(write=False)
    return TimeSeriesMatrix(np.ascontiguousarray(data))


@dataclass(frozen=True)
class DirectionVector:
    coeffs: np.ndarray
    sparsity: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.float64)
        if abs(np.linalg.norm(c) - 1.0) > 1e-10:
            raise DomainError("direction vector must have unit norm")
        if np.count_nonzero(c) > self.sparsity:
            raise DomainError(f"direction has more than {self.sparsity} nonzeros")
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class MonotoneStepFunction:
    """Left-continuous non-decreasing step function.

    ``f(x) = values[k]`` with ``k`` the number of breakpoints strictly below
    ``x``, clamped to the last index; flat beyond both ends.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if b.ndim != 1 or b.shape != v.shape:
            raise DomainError("breakpoints and values must be 1-D of equal length")
        if np.any(np.diff(b) <= 0):
            raise DomainError("breakpoints must be strictly increasing")
        if np.any(np.diff(v) < 0):
            raise DomainError("values must be non-decreasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.breakpoints.size

    def __call__(self, x):
        if len(self) == 0:
            raise DomainError("cannot evaluate an empty step function")
        k = np.searchsorted(self.breakpoints, x, side="left")
        return self.values[np.minimum(k, len(self) - 1)]

    @classmethod
    def from_fit(cls, index_sorted, fit_sorted) -> "MonotoneStepFunction":
        """Build from sorted predictors and their isotonic fit; duplicate predictors merge."""
        index_sorted = np.asarray(index_sorted, dtype=np.float64)
        keep = np.ones(index_sorted.size, dtype=bool)
        keep[1:] = index_sorted[1:] != index_sorted[:-1]
        return cls(index_sorted[keep], np.asarray(fit_sorted, dtype=np.float64)[keep])


def eval_step_function(f: MonotoneStepFunction, x: float) -> float:
    return float(f(float(x)))


@dataclass(frozen=True)
class EarlyStop:
    validation_fraction: float = 0.1
    patience: int = 20

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must lie in (0, 1)")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")


@dataclass(frozen=True)
class NodeConfig:
    """Per-node settings.  ``sparsity=None`` means: take it from the CV-selected LASSO support."""

    sparsity: Optional[int] = None
    step_size: float = 0.1
    max_iters: int = 2000
    init: str = "paper"
    init_direction: Optional[tuple] = None
    early_stop: Optional[EarlyStop] = None
    lasso_folds: int = 5
    lasso_lambdas: int = 50

    def __post_init__(self):
        if self.sparsity is not None and int(self.sparsity) < 1:
            raise ConfigError("sparsity must be >= 1")
        if not self.step_size > 0:
            raise ConfigError("step_size must be positive")
        if int(self.max_iters) < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.init not in INIT_CHOICES:
            raise ConfigError(f"init must be one of {INIT_CHOICES}")
        if (self.init == "given") != (self.init_direction is not None):
            raise ConfigError("init_direction is required iff init == 'given'")
        if self.init_direction is not None:
            object.__setattr__(self, "init_direction", tuple(float(c) for c in self.init_direction))

    def check(self, M: int) -> None:
        if self.sparsity is not None and self.sparsity > M:
            raise ConfigError(f"sparsity {self.sparsity} exceeds M={M}")
        if self.init_direction is not None and len(self.init_direction) != M:
            raise ConfigError("init_direction has the wrong length")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_direction"] = None if self.init_direction is None else list(self.init_direction)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NodeConfig":
        d = dict(d)
        if d.get("early_stop") is not None:
            d["early_stop"] = EarlyStop(**d["early_stop"])
        return cls(**d)


@dataclass
class NodeDiagnostics:
    iterations_run: int
    final_train_mse: float
    train_mse_history: list
    iterate_norm_history: list
    degenerate_steps: int = 0
    sparsity_used: int = 0
    best_iteration: Optional[int] = None
    eval_mse_history: Optional[list] = None
    iterates: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("iterates")
        return d


@dataclass
class FittedModel:
    network: np.ndarray
    step_functions: list
    diagnostics: list
    config: list
    data_stats: dict
    manifest: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return self.network.shape[0]

    def config_digest(self) -> str:
        blob = json.dumps([c.to_dict() for c in self.config], sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "M": self.M,
            "network": self.network.tolist(),
            "step_functions": [
                {"breakpoints": f.breakpoints.tolist(), "values": f.values.tolist()}
                for f in self.step_functions
            ],
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "config": [c.to_dict() for c in self.config],
            "config_digest": self.config_digest(),
            "data_stats": dict(self.data_stats),
            "manifest": dict(self.manifest),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedModel":
        expected = {
            "schema_version", "M", "network", "step_functions",
            "diagnostics", "config", "config_digest", "data_stats", "manifest",
        }
        unknown = set(d) - expected
        if unknown:
            raise SchemaError(f"unknown model fields: {sorted(unknown)}")
        missing = expected - set(d)
        if missing:
            raise SchemaError(f"missing model fields: {sorted(missing)}")
        if d["schema_version"] != SCHEMA_VERSION:
            raise SchemaError(f"unsupported schema_version {d['schema_version']}")
        network = np.array(d["network"], dtype=np.float64).reshape(d["M"], d["M"])
        model = cls(
            network=network,
            step_functions=[
                MonotoneStepFunction(np.array(f["breakpoints"], dtype=np.float64),
                                     np.array(f["values"], dtype=np.float64))
                for f in d["step_functions"]
            ],
            diagnostics=[NodeDiagnostics(**g) for g in d["diagnostics"]],
            config=[NodeConfig.from_dict(c) for c in d["config"]],
            data_stats=dict(d["data_stats"]),
            manifest=dict(d["manifest"]),
        )
        if len(model.step_functions) != model.M or len(model.config) != model.M:
            raise SchemaError("per-node arrays disagree with M")
        if model.config_digest() != d["config_digest"]:
            raise SchemaError("config digest does not match config")
        return model

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FittedModel":
        return cls.from_dict(json.loads(text))


def largest_eigenvalue(X: np.ndarray, tol: float = 1e-8, max_iter: int = 1000) -> float:
    """Largest eigenvalue of ``X.T @ X / n`` by power iteration."""
    n, m = X.shape
    G = X.T @ X / n
    v = np.ones(m) / np.sqrt(m)
    lam = 0.0
    for _ in range(max_iter):
        w = G @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new = float(v @ G @ v)
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return new
        lam = new
    return lam


def data_stats(X: TimeSeriesMatrix) -> dict:
    return {
        "M_x": float(np.max(np.abs(X.data))),
        "beta_hat": largest_eigenvalue(X.lagged),
    }
