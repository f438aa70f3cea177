"""Utility metrics for comparing a true frequency vector with an estimate."""

from __future__ import annotations

import numpy as np
from scipy import stats

__all__ = ["kl_divergence", "top_k_accuracy", "spearman_rho", "mae"]

KL_FLOOR = 1e-12


def _pair(truth, est) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(truth, dtype=float)
    e = np.asarray(est, dtype=float)
    if t.size == 0 or e.size == 0:
        raise ValueError("metric inputs must be non-empty")
    if t.shape != e.shape:
        raise ValueError(f"metric inputs must have equal length, got {t.shape} vs {e.shape}")
    return t, e


def kl_divergence(p_true, p_est) -> float:
    """KL(p_true || p_est) over a shared support.

    p_est is floored at KL_FLOOR (debiased estimates may be <= 0) and both
    vectors are renormalized over the compared support before evaluation.
    """
    t, e = _pair(p_true, p_est)
    if np.any(t < 0):
        raise ValueError("p_true must be non-negative")
    t = t / t.sum()
    e = np.clip(e, KL_FLOOR, None)
    e = e / e.sum()
    support = t > 0
    return float(np.sum(t[support] * np.log(t[support] / e[support])))


def top_k_accuracy(truth, est, k_top: int) -> float:
    """Overlap fraction between the true and estimated top-k index sets.

    Ties are broken by ascending category index in both rankings.
    """
    t, e = _pair(truth, est)
    if not 1 <= k_top <= t.size:
        raise ValueError(f"k_top must lie in [1, {t.size}], got {k_top!r}")
    idx = np.arange(t.size)
    top_true = set(idx[np.lexsort((idx, -t))][:k_top])
    top_est = set(idx[np.lexsort((idx, -e))][:k_top])
    return len(top_true & top_est) / k_top


def spearman_rho(truth, est) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    t, e = _pair(truth, est)
    return float(stats.spearmanr(t, e).statistic)


def mae(truth, est) -> float:
    """Mean absolute error."""
    t, e = _pair(truth, est)
    return float(np.mean(np.abs(t - e)))
