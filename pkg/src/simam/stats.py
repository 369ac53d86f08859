"""Error metrics and the paired t-test used to compare methods."""
from __future__ import annotations

import numpy as np
from scipy.special import betainc

from .errors import DegenerateTest, DomainError

ALTERNATIVES = ("less", "greater", "two_sided")


def network_rmse(A_hat, A_star) -> float:
    """``||A_hat - A_star||_F / sqrt(M)``: root mean squared column error."""
    A_hat = np.asarray(A_hat, dtype=np.float64)
    A_star = np.asarray(A_star, dtype=np.float64)
    if A_hat.shape != A_star.shape or A_hat.ndim != 2:
        raise DomainError(f"shape mismatch: {A_hat.shape} vs {A_star.shape}")
    return float(np.sqrt(np.sum((A_hat - A_star) ** 2) / A_hat.shape[1]))


def per_node_rmse(pred, actual) -> np.ndarray:
    pred = np.asarray(pred, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if pred.shape != actual.shape:
        raise DomainError(f"shape mismatch: {pred.shape} vs {actual.shape}")
    return np.sqrt(np.mean((pred - actual) ** 2, axis=0))


def per_node_mse(pred, actual) -> np.ndarray:
    return per_node_rmse(pred, actual) ** 2


def student_t_cdf(t, df):
    """P(T <= t) for Student's t with ``df`` degrees of freedom.

    Uses the regularized incomplete beta identity
    ``P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)``.
    """
    t = np.asarray(t, dtype=np.float64)
    df = np.asarray(df, dtype=np.float64)
    if np.any(df <= 0):
        raise DomainError("degrees of freedom must be positive")
    tail = 0.5 * betainc(df / 2.0, 0.5, df / (df + t * t))
    out = np.where(t < 0, tail, 1.0 - tail)
    return out if out.ndim else float(out)


def paired_t_test(a, b, alternative: str = "less"):
    """Paired t-test of ``mean(a - b)`` against 0.

    ``alternative="less"`` tests H1: E[a - b] < 0.  Returns ``(t, p, n)``.
    """
    if alternative not in ALTERNATIVES:
        raise DomainError(f"alternative must be one of {ALTERNATIVES}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DomainError("a and b must be 1-D arrays of equal length")
    n = a.size
    if n < 2:
        raise DomainError("need at least two pairs")
    d = a - b
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise DegenerateTest("all paired differences are equal")
    t = float(np.mean(d)) / (sd / np.sqrt(n))
    if alternative == "less":
        p = student_t_cdf(t, n - 1)
    elif alternative == "greater":
        p = student_t_cdf(-t, n - 1)
    else:
        p = 2.0 * student_t_cdf(-abs(t), n - 1)
    return t, float(p), n
