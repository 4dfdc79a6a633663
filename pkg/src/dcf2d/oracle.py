"""Brute-force ground truth on a dense grid.

The grid is labelled with discretised versions of the front definitions:

* ``CPF``     non-dominated among feasible points
* ``UPF``     non-dominated among all points
* ``SCPF_i``  non-dominated among points satisfying constraint ``i``
* ``ICPF``    CPF points farther than ``tol_match`` from every SCPF
* ``RCPF_i``  points violating constraint ``i`` that dominate an ICPF point
  lying within ``rcpf_tol`` of them (the infeasible edge facing the ICPF)

Distances are measured on objectives normalised by the CPF bounding box.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .core import nondominated_mask
from .problems import CTProblem, Problem

TOL_MATCH = 1e-3
# CT grids cover the distance term up to this value (objective sum up to 2)
CT_G_MAX = 0.5


class CouplingType(enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"


@dataclass(frozen=True)
class GridSample:
    problem: str
    resolution: int
    step: float
    X: np.ndarray
    F: np.ndarray
    C: np.ndarray
    CV: np.ndarray
    labels: dict = field(default_factory=dict)
    tol_match: float = TOL_MATCH

    def __len__(self) -> int:
        return self.F.shape[0]

    @property
    def n_con(self) -> int:
        return self.C.shape[1]

    def front(self, name: str) -> np.ndarray:
        return self.F[self.labels[name]]

    def label_names(self) -> list[str]:
        k = self.n_con
        return (["CPF", "UPF"] + [f"SCPF_{i + 1}" for i in range(k)] + ["ICPF"]
                + [f"RCPF_{i + 1}" for i in range(k)])


def sample_grid(problem: Problem, resolution: int) -> GridSample:
    """Evaluate the problem on a deterministic grid.

    CT problems are sampled through their ``(x_1, g)`` parameterisation with
    both axes stepped by ``1 / (resolution - 1)``; other problems need
    ``n_var <= 3`` and get a full tensor grid over their bounds.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    step = 1.0 / (resolution - 1)
    if isinstance(problem, CTProblem):
        # k / (R - 1) is correctly rounded, so round fractions land exactly
        x1 = np.arange(resolution) / (resolution - 1)
        n_g = int(np.ceil(CT_G_MAX * (resolution - 1))) + 1
        g = np.arange(n_g) / (resolution - 1)
        G1, X1 = np.meshgrid(g, x1, indexing="ij")
        X = problem.decision_from_slice(X1.ravel(), G1.ravel())
    elif problem.n_var <= 3:
        axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(problem.lower, problem.upper)]
        X = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    else:
        raise ValueError(f"no grid parameterisation for {problem.name} with {problem.n_var} variables")
    pop = problem.evaluate_population(X)
    return GridSample(problem.name, resolution, step, pop.X, pop.F, pop.C, pop.CV)


def _normaliser(F_ref: np.ndarray, F_all: np.ndarray):
    base = F_ref if len(F_ref) else F_all
    lo = base.min(axis=0)
    width = base.max(axis=0) - lo
    width[width <= 0] = 1.0
    return lo, width


def _masked_front(F: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.zeros(F.shape[0], dtype=bool)
    idx = np.flatnonzero(mask)
    if len(idx):
        out[idx[nondominated_mask(F[idx])]] = True
    return out


def label_fronts(sample: GridSample, tol_match: float = TOL_MATCH) -> GridSample:
    F, C = sample.F, sample.C
    n, k = C.shape
    labels = {
        "CPF": _masked_front(F, sample.CV == 0.0),
        "UPF": _masked_front(F, np.ones(n, dtype=bool)),
    }
    for i in range(k):
        labels[f"SCPF_{i + 1}"] = _masked_front(F, C[:, i] == 0.0)

    lo, width = _normaliser(F[labels["CPF"]], F)
    Z = (F - lo) / width
    cpf_idx = np.flatnonzero(labels["CPF"])
    # with no constraints every CPF point trivially lies on the (unconstrained) SCPF
    far = np.full(len(cpf_idx), k > 0)
    for i in range(k):
        scpf = Z[labels[f"SCPF_{i + 1}"]]
        if len(scpf) and len(cpf_idx):
            d, _ = cKDTree(scpf).query(Z[cpf_idx])
            far &= d > tol_match
    icpf = np.zeros(n, dtype=bool)
    icpf[cpf_idx[far]] = True
    labels["ICPF"] = icpf

    rcpf_tol = max(tol_match, 3.0 * sample.step / width.min())
    icpf_idx = np.flatnonzero(icpf)
    tree = cKDTree(Z[icpf_idx]) if len(icpf_idx) else None
    for i in range(k):
        rc = np.zeros(n, dtype=bool)
        if tree is not None:
            cand = np.flatnonzero(C[:, i] > 0.0)
            d, _ = tree.query(Z[cand], distance_upper_bound=rcpf_tol)
            cand = cand[np.isfinite(d)]
            for j, near in zip(cand, tree.query_ball_point(Z[cand], rcpf_tol)):
                Y = F[icpf_idx[near]]
                if np.any(np.all(F[j] <= Y, axis=1) & np.any(F[j] < Y, axis=1)):
                    rc[j] = True
        labels[f"RCPF_{i + 1}"] = rc
    return replace(sample, labels=labels, tol_match=tol_match)


def relevant_constraints(sample: GridSample) -> list[int]:
    """0-based constraints whose SCPF touches the CPF within ``tol_match``."""
    F = sample.F
    lo, width = _normaliser(sample.front("CPF"), F)
    cpf = (sample.front("CPF") - lo) / width
    out = []
    for i in range(sample.n_con):
        scpf = (sample.front(f"SCPF_{i + 1}") - lo) / width
        if len(scpf) and len(cpf):
            d, _ = cKDTree(scpf).query(cpf)
            if np.any(d <= sample.tol_match):
                out.append(i)
    return out


def classify_coupling(sample: GridSample) -> CouplingType:
    if not sample.labels:
        sample = label_fronts(sample)
    if sample.n_con < 2:
        raise ValueError("coupling types need at least two constraints")
    n_cpf = int(sample.labels["CPF"].sum())
    if n_cpf == 0:
        raise ValueError(f"no feasible points found for {sample.problem}")
    n_icpf = int(sample.labels["ICPF"].sum())
    relevant = relevant_constraints(sample)
    if n_icpf == n_cpf:
        return CouplingType.D
    if n_icpf > 0:
        if not relevant:
            raise AssertionError("partial ICPF without any relevant SCPF")
        return CouplingType.C
    return CouplingType.A if len(relevant) >= 2 else CouplingType.B


def farthest_point_subsample(P: np.ndarray, size: int) -> np.ndarray:
    """Greedy max-min subsample, seeded at the lexicographically first point."""
    P = np.unique(np.asarray(P, dtype=float), axis=0)
    if len(P) <= size:
        return P
    chosen = [0]
    dist = np.linalg.norm(P - P[0], axis=1)
    for _ in range(size - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(P - P[nxt], axis=1))
    return P[np.sort(chosen)]


def reference_front(problem: Problem, resolution: int = 1001, size: int = 1000) -> np.ndarray:
    """Reference set for IGD+: a max-min subsample of the grid CPF."""
    sample = label_fronts(sample_grid(problem, resolution))
    cpf = sample.front("CPF")
    if len(cpf) == 0:
        raise ValueError(f"no feasible points found for {problem.name}")
    ref = farthest_point_subsample(cpf, size)
    return ref[nondominated_mask(ref)]
