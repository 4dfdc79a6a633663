"""Hybrid differential-evolution reproduction.

Each child picks DE/rand/1 or DE/current-to-pbest/1 with equal probability,
then goes through binomial crossover, clamp repair and polynomial mutation.
Parent pools are passed in fitness order (best first) so the p-best slice is
simply a prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DEConfig:
    F: float = 0.5
    CR: float = 0.9
    p_best_frac: float = 0.1
    pm: float | None = None  # None means 1 / n_var
    eta_m: float = 20.0

    def __post_init__(self):
        if self.F <= 0:
            raise ValueError("F must be positive")
        if not 0.0 <= self.CR <= 1.0:
            raise ValueError("CR must lie in [0, 1]")
        if not 0.0 < self.p_best_frac <= 1.0:
            raise ValueError("p_best_frac must lie in (0, 1]")

    def mutation_probability(self, n_var: int) -> float:
        return 1.0 / n_var if self.pm is None else self.pm


def de_rand_1(r1, r2, r3, cfg: DEConfig, rng=None) -> np.ndarray:
    return np.asarray(r1) + cfg.F * (np.asarray(r2) - np.asarray(r3))


def de_current_to_pbest(x, pbest, r2, r3, cfg: DEConfig, rng=None) -> np.ndarray:
    x = np.asarray(x)
    return x + cfg.F * (np.asarray(pbest) - x) + cfg.F * (np.asarray(r2) - np.asarray(r3))


def binomial_crossover(target, mutant, CR: float, rng: np.random.Generator) -> np.ndarray:
    target = np.asarray(target, dtype=float)
    mutant = np.asarray(mutant, dtype=float)
    if target.shape != mutant.shape:
        raise ValueError("target and mutant lengths differ")
    mask = _crossover_mask(rng, 1, target.shape[-1], CR)[0]
    return np.where(mask, mutant, target)


def _crossover_mask(rng: np.random.Generator, n: int, d: int, CR: float) -> np.ndarray:
    mask = rng.random((n, d)) < CR
    mask[np.arange(n), rng.integers(0, d, size=n)] = True
    return mask


def polynomial_mutation(X: np.ndarray, lower, upper, pm: float, eta: float,
                        rng: np.random.Generator) -> np.ndarray:
    """Deb's bounded polynomial mutation, applied per coordinate with prob ``pm``."""
    X = np.array(X, dtype=float, copy=True)
    n, d = X.shape
    mutate = rng.random((n, d)) < pm
    u = rng.random((n, d))
    if not mutate.any():
        return X
    span = np.broadcast_to(upper - lower, (n, d))
    lo = np.broadcast_to(lower, (n, d))
    hi = np.broadcast_to(upper, (n, d))
    d1 = (X - lo) / span
    d2 = (hi - X) / span
    mpow = 1.0 / (eta + 1.0)
    with np.errstate(invalid="ignore"):
        left = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
        right = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
        dq = np.where(u < 0.5, left ** mpow - 1.0, 1.0 - right ** mpow)
    X = np.where(mutate, X + dq * span, X)
    return np.clip(X, lo, hi)


def repair_and_mutate(child, problem, cfg: DEConfig, rng: np.random.Generator) -> np.ndarray:
    """Clamp to the box, then apply polynomial mutation."""
    child = np.asarray(child, dtype=float)
    X = np.clip(np.atleast_2d(child), problem.lower, problem.upper)
    pm = cfg.mutation_probability(problem.n_var)
    if pm > 0:
        X = polynomial_mutation(X, problem.lower, problem.upper, pm, cfg.eta_m, rng)
    return X[0] if child.ndim == 1 else X


def _distinct_triples(rng, pool_size: int, targets: np.ndarray) -> np.ndarray:
    """Three mutually distinct pool indices per child, avoiding the target when possible."""
    keys = rng.random((len(targets), pool_size))
    if pool_size >= 4:
        keys[np.arange(len(targets)), targets] = np.inf
    return np.argsort(keys, axis=1)[:, :3]


def reproduce(pool: np.ndarray, count: int, problem, cfg: DEConfig,
              rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """Generate ``count`` children from ``pool`` (rows ordered best first).

    Returns the children and whether the mutation-only fallback was used
    (pools with fewer than three distinct parents cannot form a difference
    vector).
    """
    pool = np.atleast_2d(np.asarray(pool, dtype=float))
    d = problem.n_var
    if count <= 0:
        return np.empty((0, d)), False
    size = pool.shape[0]
    if size == 0:
        raise ValueError("cannot reproduce from an empty pool")
    if len(np.unique(pool, axis=0)) < 3:
        base = pool[rng.integers(0, size, size=count)]
        pm = max(cfg.mutation_probability(d), 1.0 / d)
        X = polynomial_mutation(np.clip(base, problem.lower, problem.upper),
                                problem.lower, problem.upper, pm, cfg.eta_m, rng)
        return X, True

    targets = rng.integers(0, size, size=count)
    r = _distinct_triples(rng, size, targets)
    use_pbest = rng.random(count) < 0.5
    n_top = max(1, math.ceil(cfg.p_best_frac * size))
    pbest = rng.integers(0, n_top, size=count)

    x = pool[targets]
    rand1 = pool[r[:, 0]] + cfg.F * (pool[r[:, 1]] - pool[r[:, 2]])
    to_pbest = x + cfg.F * (pool[pbest] - x) + cfg.F * (pool[r[:, 1]] - pool[r[:, 2]])
    mutant = np.where(use_pbest[:, None], to_pbest, rand1)

    mask = _crossover_mask(rng, count, d, cfg.CR)
    trial = np.where(mask, mutant, x)
    trial = np.clip(trial, problem.lower, problem.upper)
    pm = cfg.mutation_probability(d)
    if pm > 0:
        trial = polynomial_mutation(trial, problem.lower, problem.upper, pm, cfg.eta_m, rng)
    return trial, False
