"""Quality indicators and the rank-sum test used to compare runs."""

from __future__ import annotations

import math

import numpy as np

EXACT_LIMIT = 20


def igd_plus(P, Q) -> float:
    """Mean over reference points of the smallest dominance-aware distance to ``Q``.

    Parameters
    ----------
    P : array_like, shape (n_ref, M)
        Reference front.
    Q : array_like, shape (n, M)
        Approximation set; must be nonempty.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.size == 0:
        raise ValueError("IGD+ is undefined for an empty approximation set")
    if P.size == 0:
        raise ValueError("reference set is empty")
    if P.shape[1] != Q.shape[1]:
        raise ValueError("objective dimensions differ")
    best = np.full(len(P), np.inf)
    # chunk over Q to bound memory at n_ref * chunk
    for start in range(0, len(Q), 512):
        block = Q[start:start + 512]
        sq = np.zeros((len(P), len(block)))
        for m in range(P.shape[1]):
            gap = np.maximum(block[None, :, m] - P[:, m, None], 0.0)
            sq += gap * gap
        best = np.minimum(best, sq.min(axis=1))
    return float(np.sqrt(best).mean())


def hypervolume_2d(Q, R) -> float:
    """Area dominated by ``Q`` and bounded by the reference point ``R``."""
    R = np.asarray(R, dtype=float)
    Q = np.asarray(Q, dtype=float).reshape(-1, 2)
    Q = Q[np.all(Q < R, axis=1)]
    if len(Q) == 0:
        return 0.0
    Q = Q[np.lexsort((Q[:, 1], Q[:, 0]))]
    area, f2_best = 0.0, R[1]
    for f1, f2 in Q:
        if f2 < f2_best:
            area += (R[0] - f1) * (f2_best - f2)
            f2_best = f2
    return float(area)


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _rank_sum_distribution(doubled_ranks: np.ndarray, n1: int) -> dict:
    """Counts of every achievable doubled rank sum over all size-``n1`` subsets."""
    # layer[k] maps doubled sum -> number of subsets of size k
    layers = [dict() for _ in range(n1 + 1)]
    layers[0][0] = 1
    for r in doubled_ranks:
        for k in range(min(n1, len(doubled_ranks)), 0, -1):
            prev = layers[k - 1]
            cur = layers[k]
            for s, c in prev.items():
                cur[s + r] = cur.get(s + r, 0) + c
    return layers[n1]


def wilcoxon_rank_sum(a, b, alternative: str = "two-sided") -> tuple[float, float]:
    """Rank-sum statistic of ``a`` and its p-value.

    Exact for ``len(a) + len(b) <= 20`` (ties handled through the
    conditional distribution of midranks), normal approximation with tie
    correction otherwise. ``alternative="less"`` tests whether ``a`` tends
    to be smaller than ``b``; ``"greater"`` the reverse.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if len(a) < 1 or len(b) < 1:
        raise ValueError("both samples need at least one value")
    if alternative not in ("two-sided", "less", "greater"):
        raise ValueError(f"unknown alternative {alternative!r}")
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    W = float(ranks[:n1].sum())
    if np.all(pooled == pooled[0]):
        return W, 1.0

    if n1 + n2 <= EXACT_LIMIT:
        doubled = np.rint(2 * ranks).astype(np.int64)
        dist = _rank_sum_distribution([int(r) for r in doubled], n1)
        total = math.comb(n1 + n2, n1)
        w2 = int(doubled[:n1].sum())
        lower = sum(c for s, c in dist.items() if s <= w2) / total
        upper = sum(c for s, c in dist.items() if s >= w2) / total
    else:
        mean = n1 * (n1 + n2 + 1) / 2.0
        _, counts = np.unique(pooled, return_counts=True)
        n = n1 + n2
        tie = float(np.sum(counts ** 3 - counts)) / (n * (n - 1))
        var = n1 * n2 / 12.0 * ((n + 1) - tie)
        sd = math.sqrt(var)
        if sd == 0.0:
            return W, 1.0
        # continuity correction of one half
        lower = _normal_cdf((W - mean + 0.5) / sd)
        upper = 1.0 - _normal_cdf((W - mean - 0.5) / sd)
    if alternative == "less":
        return W, min(1.0, lower)
    if alternative == "greater":
        return W, min(1.0, upper)
    return W, min(1.0, 2.0 * min(lower, upper))


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def compare_mark(a, b, alpha: float = 0.05) -> tuple[str, float]:
    """Mark of sample ``b`` against the reference sample ``a`` (lower is better).

    ``'+'`` if ``b`` is significantly better, ``'-'`` if significantly worse,
    ``'='`` otherwise.
    """
    W, p = wilcoxon_rank_sum(a, b)
    if p >= alpha:
        return "=", p
    # a large rank sum for the reference means b tends to be smaller
    expected = len(a) * (len(a) + len(b) + 1) / 2.0
    return ("+" if W > expected else "-"), p
