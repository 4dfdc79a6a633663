"""Domain types, constraint-violation arithmetic and dominance relations.

Two representations live side by side. :class:`Individual` is the value type
used at API boundaries and in tests; :class:`Population` stores a batch of
evaluated solutions as parallel numpy arrays and is what the engine moves
around. Every dominance relation exists in a scalar form (``dominates``) and
a batched form (``dominance_matrix``), and the two are kept in agreement by
the test-suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Individual:
    """One evaluated solution: decision vector, objectives, violations."""

    x: np.ndarray
    f: np.ndarray
    c: np.ndarray
    cv: float

    @classmethod
    def from_values(cls, x, f, c=()) -> "Individual":
        c = np.asarray(c, dtype=float)
        return cls(
            x=np.asarray(x, dtype=float),
            f=np.asarray(f, dtype=float),
            c=c,
            cv=total_violation(c),
        )

    @property
    def feasible(self) -> bool:
        return self.cv == 0.0


@dataclass(frozen=True)
class DominanceMode:
    """Which relation to use when comparing two solutions.

    ``kind`` is one of ``"objective"``, ``"cdp_all"`` or ``"cdp_single"``;
    ``index`` is the 0-based constraint index for ``"cdp_single"``.
    """

    kind: str
    index: int | None = None

    def __post_init__(self):
        if self.kind not in ("objective", "cdp_all", "cdp_single"):
            raise ValueError(f"unknown dominance kind {self.kind!r}")
        if (self.kind == "cdp_single") != (self.index is not None):
            raise ValueError("a constraint index is required for (and only for) cdp_single")
        if self.index is not None and self.index < 0:
            raise ValueError("constraint index must be non-negative")

    @classmethod
    def objective(cls) -> "DominanceMode":
        return cls("objective")

    @classmethod
    def cdp_all(cls) -> "DominanceMode":
        return cls("cdp_all")

    @classmethod
    def cdp_single(cls, index: int) -> "DominanceMode":
        return cls("cdp_single", index)


OBJECTIVE = DominanceMode.objective()
CDP_ALL = DominanceMode.cdp_all()


def evaluate_violations(g: Sequence[float], h: Sequence[float] = (), delta: float = 1e-4) -> np.ndarray:
    """Per-constraint violation degrees.

    Inequalities map to ``max(0, g_k)``; equalities to ``max(0, |h_j| - delta)``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    return np.concatenate([np.maximum(0.0, g), np.maximum(0.0, np.abs(h) - delta)])


def total_violation(c) -> float:
    """Left-to-right sum of violation degrees."""
    total = 0.0
    for value in np.asarray(c, dtype=float).ravel():
        total += float(value)
    return total


def _row_sums(C: np.ndarray) -> np.ndarray:
    # column-by-column accumulation reproduces total_violation bit-for-bit
    total = np.zeros(C.shape[0])
    for k in range(C.shape[1]):
        total = total + C[:, k]
    return total


def _violation_of(ind: Individual, mode: DominanceMode) -> float:
    if mode.kind == "cdp_single":
        return float(ind.c[mode.index])
    return ind.cv


def objective_dominates(fa, fb) -> bool:
    fa = np.asarray(fa)
    fb = np.asarray(fb)
    if fa.shape != fb.shape:
        raise ValueError(f"objective dimension mismatch: {fa.shape} vs {fb.shape}")
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def dominates(a: Individual, b: Individual, mode: DominanceMode = OBJECTIVE) -> bool:
    """True iff ``a`` dominates ``b`` under ``mode``."""
    if len(a.f) != len(b.f) or len(a.c) != len(b.c):
        raise ValueError("individuals come from problems of different shape")
    if mode.kind == "objective":
        return objective_dominates(a.f, b.f)
    va, vb = _violation_of(a, mode), _violation_of(b, mode)
    if va == 0.0 and vb == 0.0:
        return objective_dominates(a.f, b.f)
    if va == 0.0:
        return True
    if vb == 0.0:
        return False
    return va < vb


def nondominated_subset(pop: Iterable[Individual], mode: DominanceMode = OBJECTIVE) -> list[Individual]:
    """Members dominated by no other member, in input order."""
    pop = list(pop)
    return [p for p in pop if not any(dominates(q, p, mode) for q in pop if q is not p)]


# --------------------------------------------------------------------------
# batched relations


def dominance_between(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True iff row ``i`` of ``A`` objective-dominates row ``j`` of ``B``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    le = np.ones((A.shape[0], B.shape[0]), dtype=bool)
    lt = np.zeros_like(le)
    # column loop: M is small, and this avoids (n, n, M) temporaries
    for m in range(A.shape[1]):
        a, b = A[:, m, None], B[None, :, m]
        le &= a <= b
        lt |= a < b
    return le & lt


def objective_dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True iff row ``i`` of ``F`` dominates row ``j``."""
    return dominance_between(F, F)


def cdp_dominance_matrix(F: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Constraint-dominance with ``v`` as the (already aggregated) violation."""
    v = np.asarray(v, dtype=float)
    feas = v == 0.0
    dom = objective_dominance_matrix(F)
    both_feasible = feas[:, None] & feas[None, :]
    feas_beats = feas[:, None] & ~feas[None, :]
    both_infeasible = ~feas[:, None] & ~feas[None, :]
    lower_v = v[:, None] < v[None, :]
    return (both_feasible & dom) | feas_beats | (both_infeasible & lower_v)


def dominance_matrix(F: np.ndarray, C: np.ndarray | None, CV: np.ndarray | None,
                     mode: DominanceMode) -> np.ndarray:
    if mode.kind == "objective":
        return objective_dominance_matrix(F)
    if mode.kind == "cdp_all":
        return cdp_dominance_matrix(F, CV)
    return cdp_dominance_matrix(F, C[:, mode.index])


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    """Objective-mode non-dominance mask; O(n log n) path for two objectives."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    if F.shape[1] != 2:
        return ~objective_dominance_matrix(F).any(axis=0)
    order = np.lexsort((F[:, 1], F[:, 0]))
    f1 = F[order, 0]
    f2 = F[order, 1]
    # group rows sharing the same f1; a point is dominated if a strictly
    # smaller-f1 point has f2 <= its own, or a same-f1 point has smaller f2
    starts = np.flatnonzero(np.r_[True, f1[1:] != f1[:-1]])
    group_min = f2[starts]  # sorted by f2 inside each group
    group_id = np.repeat(np.arange(len(starts)), np.diff(np.r_[starts, n]))
    prefix = np.minimum.accumulate(group_min)
    before = np.r_[np.inf, prefix[:-1]]
    dominated = (before[group_id] <= f2) | (f2 > group_min[group_id])
    mask = np.empty(n, dtype=bool)
    mask[order] = ~dominated
    return mask


@dataclass(frozen=True)
class Population:
    """A batch of evaluated solutions stored as parallel arrays.

    ``ids`` are unique evaluation serial numbers; two populations hold the
    same members iff their id sets are equal.
    """

    X: np.ndarray
    F: np.ndarray
    C: np.ndarray
    CV: np.ndarray
    ids: np.ndarray

    @classmethod
    def empty(cls, n_var: int, n_obj: int, n_con: int) -> "Population":
        return cls(np.empty((0, n_var)), np.empty((0, n_obj)), np.empty((0, n_con)),
                   np.empty(0), np.empty(0, dtype=np.int64))

    @classmethod
    def from_arrays(cls, X, F, C, ids=None) -> "Population":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F = np.atleast_2d(np.asarray(F, dtype=float))
        C = np.asarray(C, dtype=float).reshape(F.shape[0], -1)
        if ids is None:
            ids = np.arange(F.shape[0], dtype=np.int64)
        return cls(X, F, C, _row_sums(C), np.asarray(ids, dtype=np.int64))

    @classmethod
    def from_individuals(cls, inds: Sequence[Individual], ids=None) -> "Population":
        if not inds:
            raise ValueError("cannot infer dimensions from an empty list")
        return cls.from_arrays([i.x for i in inds], [i.f for i in inds],
                               [i.c for i in inds], ids)

    def __len__(self) -> int:
        return self.F.shape[0]

    @property
    def n_var(self) -> int:
        return self.X.shape[1]

    @property
    def n_obj(self) -> int:
        return self.F.shape[1]

    @property
    def n_con(self) -> int:
        return self.C.shape[1]

    @property
    def feasible(self) -> np.ndarray:
        return self.CV == 0.0

    def take(self, idx) -> "Population":
        idx = np.asarray(idx)
        if idx.size == 0:
            idx = idx.astype(np.intp)
        return Population(self.X[idx], self.F[idx], self.C[idx], self.CV[idx], self.ids[idx])

    def __add__(self, other: "Population") -> "Population":
        return Population(np.vstack([self.X, other.X]), np.vstack([self.F, other.F]),
                          np.vstack([self.C, other.C]), np.concatenate([self.CV, other.CV]),
                          np.concatenate([self.ids, other.ids]))

    def member_set(self) -> frozenset:
        return frozenset(self.ids.tolist())

    def individual(self, i: int) -> Individual:
        return Individual(self.X[i], self.F[i], self.C[i], float(self.CV[i]))

    def individuals(self) -> list[Individual]:
        return [self.individual(i) for i in range(len(self))]

    def violation(self, mode: DominanceMode) -> np.ndarray:
        if mode.kind == "cdp_single":
            return self.C[:, mode.index]
        return self.CV

    def dominance(self, mode: DominanceMode, objectives: np.ndarray | None = None) -> np.ndarray:
        F = self.F if objectives is None else objectives
        return dominance_matrix(F, self.C, self.CV, mode)
