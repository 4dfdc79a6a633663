"""Slow, independent reference implementations of the quality indicators and
the rank-sum test, used only as test oracles."""

import itertools
import math

import numpy as np
from scipy import stats


def brute_igd_plus(P, Q):
    total = 0.0
    for v in P:
        best = math.inf
        for u in Q:
            d = math.sqrt(sum(max(ui - vi, 0.0) ** 2 for ui, vi in zip(u, v)))
            best = min(best, d)
        total += best
    return total / len(P)


def inclusion_exclusion_hv(Q, R):
    Q = [q for q in Q if q[0] < R[0] and q[1] < R[1]]
    area = 0.0
    for k in range(1, len(Q) + 1):
        for sub in itertools.combinations(Q, k):
            x = max(p[0] for p in sub)
            y = max(p[1] for p in sub)
            area += (-1) ** (k + 1) * (R[0] - x) * (R[1] - y)
    return area


def enumerated_p(a, b):
    pooled = np.concatenate([a, b])
    ranks = stats.rankdata(pooled)
    n1 = len(a)
    w = ranks[:n1].sum()
    sums = np.array([ranks[list(c)].sum() for c in itertools.combinations(range(len(pooled)), n1)])
    lower = np.mean(sums <= w + 1e-9)
    upper = np.mean(sums >= w - 1e-9)
    return w, min(1.0, 2 * min(lower, upper))
