"""Problem abstraction and the built-in CT suite.

Every CT problem shares one bi-objective landscape::

    g  = sum(x_j**2 for j >= 2)        x_1 in [0, 1], x_j in [-1, 1]
    f1 = x_1 + g
    f2 = 1 - x_1 + g

so the attainable objective region is ``{f1 + f2 >= 1, |f1 - f2| <= 1}`` and
the unconstrained front is the segment ``f1 + f2 = 1``. The problems differ
only in their inequality constraints (``g_raw <= 0`` means satisfied), which
are built from ``f1`` and the objective sum ``s = f1 + f2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Population

CT_D_STRIP = 1.402
CT_D_WALL = 4.0


@dataclass(frozen=True)
class Problem:
    """A box-bounded constrained multi-objective problem.

    ``func`` maps a ``(n, D)`` array of decision vectors to a pair
    ``(F, G)`` of shape ``(n, M)`` and ``(n, n_con)``.
    """

    name: str
    lower: np.ndarray
    upper: np.ndarray
    n_obj: int
    n_con: int
    func: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]] = field(repr=False)

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("bounds must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise ValueError("every lower bound must be below its upper bound")
        if self.n_obj < 2:
            raise ValueError("at least two objectives are required")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_var(self) -> int:
        return self.lower.shape[0]

    def evaluate(self, x):
        """Objectives and raw constraint values for one vector or a batch."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        if X.shape[1] != self.n_var:
            raise ValueError(f"{self.name} expects {self.n_var} variables, got {X.shape[1]}")
        F, G = self.func(X)
        F = np.asarray(F, dtype=float).reshape(X.shape[0], self.n_obj)
        G = np.asarray(G, dtype=float).reshape(X.shape[0], self.n_con)
        if single:
            return F[0], G[0]
        return F, G

    def violations(self, x) -> np.ndarray:
        _, G = self.evaluate(x)
        return np.maximum(0.0, G)

    def evaluate_population(self, X: np.ndarray, first_id: int = 0) -> Population:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F, G = self.evaluate(X)
        ids = np.arange(first_id, first_id + X.shape[0], dtype=np.int64)
        return Population.from_arrays(X, F, np.maximum(0.0, G), ids)


@dataclass(frozen=True)
class CTProblem(Problem):
    """A CT problem; objectives and constraints depend on x only via (x_1, g)."""

    def decision_from_slice(self, x1: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Decision vectors realising the given ``(x_1, g)`` pairs."""
        x1 = np.asarray(x1, dtype=float)
        g = np.asarray(g, dtype=float)
        X = np.zeros((x1.shape[0], self.n_var))
        X[:, 0] = x1
        X[:, 1] = np.sqrt(g)
        return X


def ct_objectives(X: np.ndarray) -> np.ndarray:
    g = np.sum(X[:, 1:] ** 2, axis=1)
    return np.column_stack([X[:, 0] + g, 1.0 - X[:, 0] + g])


def _ct(name: str, constraints, n_var: int) -> CTProblem:
    if n_var < 2:
        raise ValueError("CT problems need at least two variables")

    def func(X):
        F = ct_objectives(X)
        return F, constraints(F[:, 0], F[:, 1])

    lower = np.r_[0.0, -np.ones(n_var - 1)]
    upper = np.ones(n_var)
    n_con = constraints(np.zeros(1), np.ones(1)).shape[1]
    return CTProblem(name, lower, upper, 2, n_con, func)


def ct_a(n_var: int = 5) -> CTProblem:
    """Two half-plane cuts whose fronts join on the unconstrained segment."""
    def constraints(f1, f2):
        return np.column_stack([1.4 - (2.0 * f1 + f2), 1.4 - (f1 + 2.0 * f2)])
    return _ct("CT-A", constraints, n_var)


def ct_b(n_var: int = 5) -> CTProblem:
    """A band cut that alone shapes the front; the notch constraint is dominated away."""
    def constraints(f1, f2):
        s = f1 + f2
        notch = np.minimum(np.minimum(f1 - 0.5, 0.7 - f1), 1.4 - s)
        return np.column_stack([1.2 - s, notch])
    return _ct("CT-B", constraints, n_var)


def ct_c(n_var: int = 5) -> CTProblem:
    """Partly coupled: one cut shapes most of the front, an infeasible band the rest."""
    def constraints(f1, f2):
        s = f1 + f2
        band = np.minimum(0.5 - f1, (1.3 - s) * (s - 1.1))
        return np.column_stack([1.4 - (2.0 * f1 + f2), band])
    return _ct("CT-C", constraints, n_var)


def ct_d(n_var: int = 5) -> CTProblem:
    """Two overlapping infeasible bands; the whole front sits on the outer edge ``s = 1.4``.

    A third constraint walls off everything between the thin feasible strip
    ``1.4 <= s <= 1.402`` and ``s = 4``. Its violation shrinks towards the
    top of the wall, so violation-driven search is led away from the front.
    """
    def constraints(f1, f2):
        s = f1 + f2
        wall = np.where(s > CT_D_STRIP, CT_D_WALL - s, s - CT_D_STRIP)
        return np.column_stack([(1.25 - s) * (s - 0.9), (1.4 - s) * (s - 1.2), wall])
    return _ct("CT-D", constraints, n_var)


REGISTRY: dict[str, Callable[..., Problem]] = {
    "CT-A": ct_a,
    "CT-B": ct_b,
    "CT-C": ct_c,
    "CT-D": ct_d,
}


def get_problem(name: str, **kwargs) -> Problem:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; registered: {', '.join(sorted(REGISTRY))}") from None
    return factory(**kwargs)
