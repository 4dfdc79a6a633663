"""Decoupled constraint handling for constrained multi-objective optimisation."""

from .core import CDP_ALL, OBJECTIVE, DominanceMode, Individual, Population, dominates
from .engine import EngineConfig, RunResult, Variant, run, run_variant
from .metrics import hypervolume_2d, igd_plus, wilcoxon_rank_sum
from .oracle import CouplingType, classify_coupling, label_fronts, reference_front, sample_grid
from .problems import REGISTRY, Problem, get_problem

__all__ = [
    "CDP_ALL", "OBJECTIVE", "DominanceMode", "Individual", "Population", "dominates",
    "EngineConfig", "RunResult", "Variant", "run", "run_variant",
    "hypervolume_2d", "igd_plus", "wilcoxon_rank_sum",
    "CouplingType", "classify_coupling", "label_fronts", "reference_front", "sample_grid",
    "REGISTRY", "Problem", "get_problem",
]
__version__ = "0.1.0"
