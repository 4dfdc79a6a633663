"""Update rules for the main population, the unconstrained explorer, the
infeasible archive and the constraint-specific auxiliary populations."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .core import CDP_ALL, OBJECTIVE, DominanceMode, Population, dominance_between
from .selection import AUX_K, environmental_select, ranking, select_top, spea2_fitness


class Direction(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class AuxState:
    """Constraint-specific population ``AP_i`` with its control flags.

    ``index`` is the 0-based constraint index. ``fitness`` holds the values
    from the last selection, for diagnostics only.
    """

    index: int
    members: Population
    active: bool = False
    direction: Direction = Direction.POSITIVE
    protected_until: int | None = None
    fitness: np.ndarray | None = None

    def is_protected(self, generation: int) -> bool:
        return self.protected_until is not None and generation <= self.protected_until


def aux_capacity(N: int) -> int:
    return N // 4


def update_mp(mp: Population, offspring: Population, N: int) -> Population:
    S = mp + offspring
    return environmental_select(S, spea2_fitness(S, CDP_ALL), N)


def update_ap0(ap0: Population, offspring: Population, N: int) -> Population:
    S = ap0 + offspring
    return environmental_select(S, spea2_fitness(S, OBJECTIVE), N)


def _dominates_any(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """For each row of A, whether it objective-dominates at least one row of B."""
    if len(A) == 0 or len(B) == 0:
        return np.zeros(len(A), dtype=bool)
    return dominance_between(A, B).any(axis=1)


def _dominated_by_any(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """For each row of A, whether some row of B objective-dominates it."""
    if len(A) == 0 or len(B) == 0:
        return np.zeros(len(A), dtype=bool)
    return dominance_between(B, A).any(axis=0)


def li_screen(S: Population, mp: Population) -> np.ndarray:
    """Members that dominate some MP member and are dominated by none."""
    return _dominates_any(S.F, mp.F) & ~_dominated_by_any(S.F, mp.F)


def update_li(li: Population, offspring: Population, mp: Population,
              N: int) -> tuple[Population, bool]:
    """Infeasible-archive update; returns the archive and whether it changed."""
    if len(mp) == 0:
        return li.take(np.zeros(0, dtype=np.int64)), False
    S = li + offspring
    S = S.take(np.flatnonzero(li_screen(S, mp)))
    infeasible = S.take(np.flatnonzero(~S.feasible))
    feasible = S.take(np.flatnonzero(S.feasible))
    if len(infeasible) > N:
        fit = spea2_fitness(infeasible, OBJECTIVE, objectives=-infeasible.F)
        new = environmental_select(infeasible, fit, N)
    else:
        # archive order: infeasible members first, in their own -F ranking
        if len(infeasible):
            fit = spea2_fitness(infeasible, OBJECTIVE, objectives=-infeasible.F)
            infeasible = select_top(infeasible, fit, len(infeasible))
        k = N - len(infeasible)
        if len(feasible) and k > 0:
            new = infeasible + select_top(feasible, spea2_fitness(feasible, OBJECTIVE), k)
        else:
            new = infeasible
    return new, new.member_set() != li.member_set()


def _negative_objectives(pop: Population, index: int) -> np.ndarray:
    return np.column_stack([-pop.F, pop.C[:, index]])


def update_ap(ap: AuxState, offspring: Population, mp: Population, N: int) -> AuxState:
    """Constraint-specific update in the population's current direction."""
    S = ap.members + offspring
    n_sub = aux_capacity(N)
    i = ap.index
    single = DominanceMode.cdp_single(i)

    if ap.direction is Direction.POSITIVE:
        fit = spea2_fitness(S, single, k=AUX_K)
        order = ranking(fit, S.F)[:n_sub]
        return replace(ap, members=S.take(order), fitness=fit[order])

    violating = S.C[:, i] > 0.0
    if not violating.any():
        fit = spea2_fitness(S, single, k=AUX_K)
        order = ranking(fit, S.F)[:n_sub]
        return replace(ap, members=S.take(order), fitness=fit[order])

    target = S.take(np.flatnonzero(violating))
    penalized_mask = _dominated_by_any(target.F, mp.F)
    best = target.take(np.flatnonzero(~penalized_mask))
    penalized = target.take(np.flatnonzero(penalized_mask))

    # violation of c_i rides along as an extra minimised criterion so that
    # points deep inside the infeasible region do not survive on -F alone
    best_fit = spea2_fitness(best, single, k=AUX_K, objectives=_negative_objectives(best, i))
    order = ranking(best_fit, best.F)[:n_sub]
    members, fitness = best.take(order), best_fit[order]
    fill = n_sub - len(members)
    if fill > 0 and len(penalized):
        pen_fit = spea2_fitness(penalized, single, k=AUX_K)
        pen_order = ranking(pen_fit, penalized.F)[:fill]
        members = members + penalized.take(pen_order)
        fitness = np.concatenate([fitness, pen_fit[pen_order]])
    return replace(ap, members=members, fitness=fitness)


def seed_aux(li: Population, mp: Population, index: int, N: int) -> Population:
    """Initial members for a newly (re)activated AP_i.

    The best LI members violating constraint ``index`` come first, padded
    with the leading MP members.
    """
    n_sub = aux_capacity(N)
    cand = li.take(np.flatnonzero(li.C[:, index] > 0.0))
    if len(cand):
        fit = spea2_fitness(cand, DominanceMode.cdp_single(index), k=AUX_K)
        cand = select_top(cand, fit, n_sub)
    pad = n_sub - len(cand)
    if pad > 0:
        taken = cand.member_set()
        extra = [j for j in range(len(mp)) if int(mp.ids[j]) not in taken][:pad]
        cand = cand + mp.take(np.asarray(extra, dtype=np.int64))
    return cand
