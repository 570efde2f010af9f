"""Summary statistics: quantiles, Wilcoxon signed-rank test, win-rate series."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

EXACT_WILCOXON_MAX_N = 25
MIN_WILCOXON_N = 5


def quantile(values: Sequence[float], level: float) -> float:
    """Linear interpolation between closest ranks (inclusive endpoints)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("quantile of an empty sequence")
    if not 0.0 < level < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {level}")
    return float(np.quantile(v, level, method="linear"))


def _rankdata(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _exact_sf_counts(doubled_ranks: np.ndarray) -> np.ndarray:
    """Number of sign assignments giving each value of 2*W+."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled_ranks.astype(int):
        # the right-hand side is a fresh array, so this is old[k] + old[k - r]
        counts[r:] = counts[r:] + counts[:-r]
    return counts


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sided signed-rank test on paired samples.

    Zero differences are dropped and tied magnitudes share average ranks.
    Returns ``(min(W+, W-), p)``; p is exact (enumerating sign assignments)
    for up to 25 non-zero pairs, else from the normal approximation with tie
    and continuity corrections.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d and equally long")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise ValueError("all differences zero")
    if n < MIN_WILCOXON_N:
        raise ValueError(f"need at least {MIN_WILCOXON_N} non-zero differences, got {n}")
    ranks = _rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    total = n * (n + 1) / 2
    stat = min(w_plus, total - w_plus)
    if n <= EXACT_WILCOXON_MAX_N:
        doubled = np.rint(2 * ranks).astype(int)
        counts = _exact_sf_counts(doubled)
        k = int(round(2 * stat))
        tail = int(sum(counts[: k + 1]))
        p = min(1.0, 2 * tail / 2 ** n)
        return stat, float(p)
    mean = total / 2
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - float(np.sum(tie_counts ** 3 - tie_counts)) / 48
    z = (abs(w_plus - mean) - 0.5) / math.sqrt(var)
    p = math.erfc(max(z, 0.0) / math.sqrt(2))
    return stat, float(min(1.0, p))


def win_rate_series(qga_fidelity: np.ndarray, classical_fidelity: np.ndarray, paired: bool = False) -> np.ndarray:
    """Per-generation share of classical runs with fidelity <= the QGA reference.

    ``qga_fidelity`` has shape (hamiltonians, qga_seeds, generations+1) and
    ``classical_fidelity`` (hamiltonians, classical_seeds, generations+1).
    The reference is the mean over QGA seeds; with ``paired`` each classical
    seed k is compared with QGA seed ``k mod qga_seeds`` instead.  The share
    is averaged over Hamiltonians.
    """
    q = np.asarray(qga_fidelity, dtype=float)
    c = np.asarray(classical_fidelity, dtype=float)
    if q.ndim != 3 or c.ndim != 3 or q.shape[0] != c.shape[0] or q.shape[2] != c.shape[2]:
        raise ValueError(f"mismatched record shapes {q.shape} and {c.shape}")
    if paired:
        ref = q[:, np.arange(c.shape[1]) % q.shape[1], :]
    else:
        ref = q.mean(axis=1, keepdims=True)
    return (c <= ref).mean(axis=1).mean(axis=0)
