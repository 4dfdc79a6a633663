"""Fitness assignment and rank-based environmental selection.

Fitness is SPEA2's raw strength fitness plus a k-th nearest neighbour density
term; lower is better. Selection keeps the ``n`` best by fitness, breaking
ties lexicographically by objectives and then by position.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DominanceMode, Population, dominance_matrix

AUX_K = 3


def _normalise(points: np.ndarray) -> np.ndarray:
    lo = points.min(axis=0)
    width = points.max(axis=0) - lo
    keep = width > 0
    return (points[:, keep] - lo[keep]) / width[keep]


def _pairwise_distances(Z: np.ndarray) -> np.ndarray:
    sq = np.zeros((Z.shape[0], Z.shape[0]))
    for m in range(Z.shape[1]):
        d = Z[:, m, None] - Z[None, :, m]
        sq += d * d
    D = np.sqrt(sq)
    np.fill_diagonal(D, np.inf)
    return D


def kth_neighbour_distance(points, k: int) -> np.ndarray:
    """Distance from each point to its k-th nearest other point (inf if none)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if n <= k:
        return np.full(n, np.inf)
    Z = _normalise(points)
    if Z.shape[1] == 0:
        return np.zeros(n)
    return np.partition(_pairwise_distances(Z), k - 1, axis=1)[:, k - 1]


def knn_density_fitness(points, k: int = AUX_K) -> np.ndarray:
    """``1 / (sigma_k + 2)``; crowded points score higher (worse)."""
    return 1.0 / (kth_neighbour_distance(points, k) + 2.0)


def fitness_from_dominance(dom: np.ndarray, points: np.ndarray, k: int | None = None) -> np.ndarray:
    n = dom.shape[0]
    if n == 0:
        return np.zeros(0)
    strength = dom.sum(axis=1)
    raw = strength @ dom  # raw[j] = sum of strengths of everything dominating j
    if k is None:
        k = max(1, int(math.isqrt(n)))
    return raw + knn_density_fitness(points, k)


def spea2_fitness(pop: Population, mode: DominanceMode, k: int | None = None,
                  objectives: np.ndarray | None = None) -> np.ndarray:
    """SPEA2 fitness under ``mode``.

    ``objectives`` replaces ``pop.F`` for both the dominance test and the
    density estimate (used for negated objectives or extra criteria).
    """
    F = pop.F if objectives is None else np.asarray(objectives, dtype=float)
    dom = dominance_matrix(F, pop.C, pop.CV, mode)
    return fitness_from_dominance(dom, F, k)


def ranking(fitness: np.ndarray, objectives: np.ndarray) -> np.ndarray:
    """Indices best-first with the deterministic tie-break."""
    n = len(fitness)
    keys = [np.arange(n)] + [objectives[:, m] for m in range(objectives.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [np.asarray(fitness)])


def select_top(pop: Population, fitness: np.ndarray, n: int) -> Population:
    if n < 0:
        raise ValueError("n must be non-negative")
    order = ranking(fitness, pop.F)
    return pop.take(order[:n])


def truncate(points, n: int) -> np.ndarray:
    """Indices of ``n`` points kept by nearest-neighbour truncation.

    Repeatedly finds the closest pair and drops the member whose second
    nearest neighbour is closer, so survivors stay evenly spread. Returned
    indices are in ascending order.
    """
    points = np.asarray(points, dtype=float)
    m = points.shape[0]
    if n >= m:
        return np.arange(m)
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    Z = _normalise(points)
    D = _pairwise_distances(Z)
    alive = np.ones(m, dtype=bool)
    nn = D.min(axis=1)
    for _ in range(m - n):
        i = int(np.argmin(np.where(alive, nn, np.inf)))
        j = int(np.argmin(D[i]))
        # second-nearest distances decide which of the pair goes
        si = np.partition(D[i], 1)[1] if m > 2 else np.inf
        sj = np.partition(D[j], 1)[1] if m > 2 else np.inf
        k = i if (si, i) <= (sj, j) else j
        col = D[:, k].copy()
        alive[k] = False
        D[k, :] = np.inf
        D[:, k] = np.inf
        nn[k] = np.inf
        affected = np.flatnonzero(alive & (nn == col))
        if len(affected):
            nn[affected] = D[affected].min(axis=1)
    return np.flatnonzero(alive)


def environmental_select(pop: Population, fitness: np.ndarray, n: int,
                         objectives: np.ndarray | None = None) -> Population:
    """Keep ``n`` members; an overflowing non-dominated tier is truncated.

    Non-dominated members (fitness below 1) are kept first. When they alone
    exceed ``n`` they are thinned by :func:`truncate` on ``objectives``
    (defaults to ``pop.F``); otherwise the best ``n`` by fitness survive.
    Survivors come back in ranking order.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    fitness = np.asarray(fitness, dtype=float)
    front = np.flatnonzero(fitness < 1.0)
    if len(front) <= n:
        return select_top(pop, fitness, n)
    F = pop.F if objectives is None else np.asarray(objectives, dtype=float)
    keep = front[truncate(F[front], n)]
    order = keep[ranking(fitness[keep], pop.F[keep])]
    return pop.take(order)
