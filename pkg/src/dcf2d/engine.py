"""The three-stage co-evolutionary driver.

Stage 1 runs the main population (MP) next to an unconstrained explorer
(AP_0) until the explorer's centroid stops moving. Stage 2 drops AP_0 and
maintains constraint-specific populations AP_i, activated from the
infeasible archive (LI) and switched between the positive and negative
search directions. Stage 3 starts once ``beta * max_fe`` evaluations are
spent and leaves MP alone for the rest of the budget.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np

from .archives import (AuxState, Direction, aux_capacity, seed_aux, update_ap, update_ap0,
                       update_li, update_mp)
from .core import CDP_ALL, OBJECTIVE, Population, dominance_between, nondominated_mask
from .metrics import hypervolume_2d, igd_plus
from .operators import DEConfig, reproduce
from .problems import Problem
from .selection import select_top, spea2_fitness

MP_KEY = "MP"
AP0_KEY = "AP0"


class Variant(enum.Enum):
    BIDIRECTIONAL = "dcf2d"
    POSITIVE_ONLY = "dcf2d-pos"
    NEGATIVE_ONLY = "dcf2d-neg"
    NO_STAGE3 = "dcf2d-nos3"
    CDP_BASELINE = "cdp"

    @classmethod
    def parse(cls, name: str) -> "Variant":
        for v in cls:
            if v.value == name or v.name.lower() == name.lower():
                return v
        raise ValueError(f"unknown variant {name!r}; choose from {', '.join(v.value for v in cls)}")


@dataclass(frozen=True)
class EngineConfig:
    N: int = 100
    max_fe: int = 100_000
    beta: float = 0.9
    window: int = 5
    move_eps: float = 1e-12
    move_threshold: float = 1e-4
    min_quota: int = 5
    protection_span: int = 20
    seed: int = 0
    # accepted for interface completeness; nothing reads it
    alpha: float | None = None
    mp_sample_frac: float = 0.25
    de: DEConfig = field(default_factory=DEConfig)

    def __post_init__(self):
        if self.N < 4 or self.N % 2:
            raise ValueError("N must be an even number >= 4")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.max_fe < self.N:
            raise ValueError("max_fe must cover at least the initial population")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Event:
    generation: int
    fe: int
    kind: str
    payload: str = ""


@dataclass
class EngineState:
    stage: int
    generation: int
    fe_used: int
    mp: Population
    ap0: Population
    li: Population
    aux: list[AuxState]
    movement_window: deque
    centroid_prev: np.ndarray | None
    events: list[Event] = field(default_factory=list)
    last_allocation: dict = field(default_factory=dict)

    def log(self, kind: str, payload: str = "") -> None:
        self.events.append(Event(self.generation, self.fe_used, kind, payload))

    def active_aux(self) -> list[AuxState]:
        return [a for a in self.aux if a.active]


@dataclass
class RunResult:
    problem: str
    variant: str
    config: EngineConfig
    final_mp: Population
    events: list[Event]
    timeline: list[tuple]
    snapshots: list[tuple] = field(default_factory=list)
    fe_used: int = 0
    generations: int = 0

    @property
    def seed(self) -> int:
        return self.config.seed

    def events_of(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]


def centroid_movement(c_prev, c_now, eps: float = 1e-12) -> float:
    c_prev = np.asarray(c_prev, dtype=float)
    c_now = np.asarray(c_now, dtype=float)
    if c_prev.shape != c_now.shape:
        raise ValueError("centroid dimensions differ")
    return float(np.linalg.norm(c_now - c_prev) / (np.linalg.norm(c_now) + eps))


def stage1_should_transition(window, size: int = 5, threshold: float = 1e-4) -> bool:
    window = list(window)
    return len(window) >= size and float(np.mean(window[-size:])) < threshold


def allocate_offspring(active: list, N: int, min_quota: int = 5) -> dict:
    """Offspring counts per population; always sums to ``N``.

    MP receives half, the rest is split evenly over ``active`` (earlier
    entries take the remainder). When the even share falls below
    ``min_quota`` each active population gets exactly the quota and MP
    absorbs the difference.
    """
    if N % 2:
        raise ValueError("N must be even")
    if not active:
        return {MP_KEY: N}
    k = len(active)
    share = N // 2
    if share // k >= min_quota:
        base, extra = divmod(share, k)
        counts = [base + (1 if j < extra else 0) for j in range(k)]
    else:
        if k * min_quota > N:
            raise ValueError(f"{k} active populations cannot each receive {min_quota} of {N} offspring")
        counts = [min_quota] * k
    out = {MP_KEY: N - sum(counts)}
    out.update(zip(active, counts))
    return out


def _activate(state: EngineState, index: int, variant: Variant, N: int,
              protect_until: int | None, kind: str) -> None:
    direction = Direction.NEGATIVE if variant is Variant.NEGATIVE_ONLY else Direction.POSITIVE
    members = seed_aux(state.li, state.mp, index, N)
    state.aux[index] = replace(state.aux[index], active=True, direction=direction,
                               protected_until=protect_until, members=members, fitness=None)
    state.log(kind, f"constraint={index + 1};direction={direction.value}")


def on_li_updated(state: EngineState, new_members: Population, cfg: EngineConfig,
                  variant: Variant = Variant.BIDIRECTIONAL) -> EngineState:
    """Resurrect inactive AP_j for constraints violated by newly archived members."""
    if state.stage != 2 or len(new_members) == 0:
        return state
    violated = np.flatnonzero((new_members.C > 0.0).any(axis=0))
    for j in violated:
        if not state.aux[j].active:
            _activate(state, int(j), variant, cfg.N, state.generation + cfg.protection_span,
                      "resurrect")
    return state


def stage2_adjust(state: EngineState, variant: Variant = Variant.BIDIRECTIONAL) -> EngineState:
    """Direction switching and deactivation of AP_i during stage 2."""
    for ap in state.active_aux():
        i = ap.index
        if ap.direction is Direction.POSITIVE:
            if variant is not Variant.POSITIVE_ONLY and not ap.members.feasible.any():
                state.aux[i] = replace(ap, direction=Direction.NEGATIVE)
                state.log("flip", f"constraint={i + 1};direction=negative")
        elif not ap.is_protected(state.generation) and _all_dominated(ap.members, state.mp):
            state.aux[i] = replace(ap, active=False, protected_until=None)
            state.log("deactivate", f"constraint={i + 1}")
    return state


def _all_dominated(members: Population, mp: Population) -> bool:
    if len(members) == 0 or len(mp) == 0:
        return len(members) == 0
    return bool(dominance_between(mp.F, members.F).any(axis=0).all())


def front_quality(mp: Population, reference: np.ndarray | None, hv_ref: np.ndarray | None):
    """IGD+, HV and feasible ratio of the feasible non-dominated part of ``mp``."""
    feasible = mp.F[mp.feasible]
    ratio = float(len(feasible)) / len(mp) if len(mp) else 0.0
    if reference is None:
        return float("nan"), float("nan"), ratio
    if len(feasible) == 0:
        return float("inf"), 0.0, ratio
    front = feasible[nondominated_mask(feasible)]
    hv = hypervolume_2d(front, hv_ref) if front.shape[1] == 2 else float("nan")
    return igd_plus(reference, front), hv, ratio


class Engine:
    """One optimisation run; call :meth:`run` once."""

    def __init__(self, problem: Problem, cfg: EngineConfig,
                 variant: Variant = Variant.BIDIRECTIONAL,
                 reference: np.ndarray | None = None,
                 observer: Callable[[EngineState], None] | None = None,
                 snapshot_every: int | None = None):
        if variant is Variant.NO_STAGE3:
            cfg = replace(cfg, beta=1.0)
        self.problem = problem
        self.cfg = cfg
        self.variant = variant
        self.reference = None if reference is None else np.asarray(reference, dtype=float)
        self.hv_ref = None if reference is None else self.reference.max(axis=0)
        self.observer = observer
        self.snapshot_every = snapshot_every
        seq = np.random.SeedSequence(cfg.seed)
        children = seq.spawn(4 + problem.n_con)
        self.rng_init = np.random.default_rng(children[0])
        self.rng_sample = np.random.default_rng(children[1])
        self.rng = {MP_KEY: np.random.default_rng(children[2]),
                    AP0_KEY: np.random.default_rng(children[3])}
        for i in range(problem.n_con):
            self.rng[i] = np.random.default_rng(children[4 + i])
        self.timeline: list[tuple] = []
        self.snapshots: list[tuple] = []
        self.next_id = 0

    @property
    def baseline(self) -> bool:
        return self.variant is Variant.CDP_BASELINE

    def _evaluate(self, X: np.ndarray) -> Population:
        pop = self.problem.evaluate_population(X, first_id=self.next_id)
        self.next_id += len(pop)
        return pop

    def _initial_state(self) -> EngineState:
        p, N = self.problem, self.cfg.N
        X = p.lower + self.rng_init.random((N, p.n_var)) * (p.upper - p.lower)
        pop = self._evaluate(X)
        mp = select_top(pop, spea2_fitness(pop, CDP_ALL), N)
        ap0 = select_top(pop, spea2_fitness(pop, OBJECTIVE), N)
        empty = Population.empty(p.n_var, p.n_obj, p.n_con)
        aux = [AuxState(i, empty) for i in range(p.n_con)]
        stage = 3 if self.baseline else 1
        return EngineState(stage, 0, N, mp, ap0, empty, aux,
                           deque(maxlen=self.cfg.window), ap0.F.mean(axis=0))

    def _active_keys(self, state: EngineState) -> list:
        if state.stage == 1:
            return [AP0_KEY]
        return [a.index for a in state.active_aux()]

    def _pool(self, state: EngineState, key) -> np.ndarray:
        if key == MP_KEY:
            return state.mp.X
        if key == AP0_KEY:
            return state.ap0.X
        own = state.aux[key].members.X
        n_extra = int(round(self.cfg.mp_sample_frac * len(state.mp)))
        pick = np.sort(self.rng_sample.choice(len(state.mp), size=n_extra, replace=False))
        return np.vstack([own, state.mp.X[pick]])

    def _record(self, state: EngineState) -> None:
        igd, hv, ratio = front_quality(state.mp, self.reference, self.hv_ref)
        self.timeline.append((state.generation, state.fe_used, igd, hv, ratio))
        if self.snapshot_every and state.generation % self.snapshot_every == 0:
            self.snapshots.append(snapshot_rows(state))

    def generation(self, state: EngineState) -> None:
        cfg, N = self.cfg, self.cfg.N
        state.generation += 1
        counts = allocate_offspring(self._active_keys(state), N, cfg.min_quota)
        state.last_allocation = counts
        parts = []
        for key, count in counts.items():
            X, fallback = reproduce(self._pool(state, key), count, self.problem, cfg.de, self.rng[key])
            if fallback:
                state.log("mutation_only", f"population={_key_name(key)}")
            parts.append(X)
        offspring = self._evaluate(np.vstack(parts))
        state.fe_used += len(offspring)

        state.mp = update_mp(state.mp, offspring, N)
        if self.baseline:
            return
        if state.stage == 1:
            state.ap0 = update_ap0(state.ap0, offspring, N)
        for ap in state.active_aux():
            state.aux[ap.index] = update_ap(ap, offspring, state.mp, N)
        old_ids = state.li.member_set()
        state.li, updated = update_li(state.li, offspring, state.mp, N)
        if updated and state.stage == 2:
            fresh = [j for j in range(len(state.li)) if int(state.li.ids[j]) not in old_ids]
            on_li_updated(state, state.li.take(np.asarray(fresh, dtype=np.int64)), cfg, self.variant)

        if state.stage == 1:
            centroid = state.ap0.F.mean(axis=0)
            state.movement_window.append(centroid_movement(state.centroid_prev, centroid, cfg.move_eps))
            state.centroid_prev = centroid
            if stage1_should_transition(state.movement_window, cfg.window, cfg.move_threshold):
                state.stage = 2
                state.log("stage", "1->2")
                for j in np.flatnonzero((state.li.C > 0.0).any(axis=0)):
                    _activate(state, int(j), self.variant, N, None, "activate")
        elif state.stage == 2:
            stage2_adjust(state, self.variant)

        if state.stage < 3 and state.fe_used > cfg.beta * cfg.max_fe:
            for ap in state.active_aux():
                state.aux[ap.index] = replace(ap, active=False, protected_until=None)
            state.log("stage", f"{state.stage}->3")
            state.stage = 3

    def run(self) -> RunResult:
        state = self._initial_state()
        state.fe_used = len(state.mp)
        self._record(state)
        if self.cfg.max_fe < 2 * self.cfg.N:
            state.log("diagnostic", "budget smaller than one generation")
        if self.observer:
            self.observer(state)
        while state.fe_used + self.cfg.N <= self.cfg.max_fe:
            self.generation(state)
            self._record(state)
            if self.observer:
                self.observer(state)
        return RunResult(self.problem.name, self.variant.value, self.cfg, state.mp,
                         list(state.events), list(self.timeline), list(self.snapshots),
                         state.fe_used, state.generation)


def _key_name(key) -> str:
    if key in (MP_KEY, AP0_KEY):
        return key
    return f"AP{key + 1}"


def snapshot_rows(state: EngineState) -> tuple:
    """(generation, [(kind, population, direction_flag), ...]) for every live population."""
    pops = [(MP_KEY, state.mp, "")]
    if state.stage == 1:
        pops.append((AP0_KEY, state.ap0, ""))
    pops.append(("LI", state.li, ""))
    for ap in state.active_aux():
        pops.append((f"AP{ap.index + 1}", ap.members, ap.direction.value))
    return state.generation, pops


def run(problem: Problem, cfg: EngineConfig, reference=None, observer=None,
        snapshot_every: int | None = None) -> RunResult:
    return Engine(problem, cfg, Variant.BIDIRECTIONAL, reference, observer, snapshot_every).run()


def run_variant(problem: Problem, cfg: EngineConfig, variant: Variant | str, reference=None,
                observer=None, snapshot_every: int | None = None) -> RunResult:
    if isinstance(variant, str):
        variant = Variant.parse(variant)
    return Engine(problem, cfg, variant, reference, observer, snapshot_every).run()
