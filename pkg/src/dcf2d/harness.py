"""Run orchestration, oracle caching and batch experiments with statistics."""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .core import nondominated_mask
from .engine import EngineConfig, Variant, run_variant
from .metrics import compare_mark, hypervolume_2d, igd_plus
from .oracle import reference_front
from .problems import REGISTRY, get_problem
from .records import (RUN_FILES, engine_config_from_dict, read_points, read_snapshot, write_points,
                      write_run, fmt)

OUTPUT_ROOT_ENV = "DCF2D_OUTPUT_ROOT"
DEFAULT_RESOLUTION = 1001

BATCH_SCHEMA = {
    "type": "object",
    "required": ["problems", "variants", "seeds"],
    "additionalProperties": False,
    "properties": {
        "problems": {"type": "array", "minItems": 1, "items": {"type": "string"}},
        "variants": {"type": "array", "minItems": 1, "items": {"type": "string"}},
        "seeds": {
            "oneOf": [
                {"type": "array", "minItems": 1, "uniqueItems": True,
                 "items": {"type": "integer", "minimum": 0}},
                {"type": "object", "required": ["base", "count"], "additionalProperties": False,
                 "properties": {"base": {"type": "integer", "minimum": 0},
                                "count": {"type": "integer", "minimum": 1}}},
            ]
        },
        "reference": {"type": "string"},
        "engine": {"type": "object"},
        "output": {"type": "string"},
        "oracle_resolution": {"type": "integer", "minimum": 2},
    },
}


class ConfigError(ValueError):
    """Batch configuration rejected; the message names the first problem found."""


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "."))


def run_dir_name(problem: str, variant: str, seed: int) -> str:
    return f"{problem}__{variant}__{seed}"


def cached_reference(problem: str, resolution: int = DEFAULT_RESOLUTION,
                     cache_dir=None) -> np.ndarray:
    """Oracle reference set, built on demand and cached per problem and resolution."""
    if cache_dir is None:
        return reference_front(get_problem(problem), resolution)
    path = Path(cache_dir) / f"reference__{problem}__{resolution}.csv"
    if path.exists():
        return read_points(path)
    ref = reference_front(get_problem(problem), resolution)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".tmp{os.getpid()}")
    write_points(tmp, ref)
    tmp.replace(path)
    return ref


def execute_run(problem: str, variant: str, cfg: EngineConfig, out_dir,
                resolution: int = DEFAULT_RESOLUTION, cache_dir=None,
                snapshot_every: int | None = None):
    ref = cached_reference(problem, resolution, cache_dir)
    result = run_variant(get_problem(problem), cfg, variant, reference=ref,
                         snapshot_every=snapshot_every)
    write_run(result, out_dir)
    return result


def run_complete(path: Path) -> bool:
    return all((path / name).exists() for name in RUN_FILES)


@dataclass
class BatchSpec:
    problems: list[str]
    variants: list[str]
    seeds: list[int]
    reference: str
    engine: dict = field(default_factory=dict)
    output: str | None = None
    oracle_resolution: int = DEFAULT_RESOLUTION

    def cells(self) -> list[tuple[str, str]]:
        return [(p, v) for p in self.problems for v in self.variants]

    def runs(self) -> list[tuple[str, str, int]]:
        return [(p, v, s) for p in self.problems for v in self.variants for s in self.seeds]


def parse_batch(doc: dict) -> BatchSpec:
    """Validate a batch document; raises :class:`ConfigError` on the first violation."""
    validator = jsonschema.Draft7Validator(BATCH_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {err.message}")
    for name in doc["problems"]:
        if name not in REGISTRY:
            raise ConfigError(f"problems: unknown problem {name!r}; registered: {', '.join(sorted(REGISTRY))}")
    variants = []
    for name in doc["variants"]:
        try:
            variants.append(Variant.parse(name).value)
        except ValueError as exc:
            raise ConfigError(f"variants: {exc}") from None
    if len(set(variants)) != len(variants):
        raise ConfigError("variants: duplicate entries")
    seeds = doc["seeds"]
    if isinstance(seeds, dict):
        seeds = list(range(seeds["base"], seeds["base"] + seeds["count"]))
    reference = doc.get("reference", variants[0])
    try:
        reference = Variant.parse(reference).value
    except ValueError as exc:
        raise ConfigError(f"reference: {exc}") from None
    if reference not in variants:
        raise ConfigError(f"reference: {reference!r} is not among the variants")
    engine = dict(doc.get("engine", {}))
    if "seed" in engine:
        raise ConfigError("engine: seeds are set by the 'seeds' field")
    try:
        engine_config_from_dict(engine)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"engine: {exc}") from None
    return BatchSpec(list(doc["problems"]), variants, list(seeds), reference, engine,
                     doc.get("output"), doc.get("oracle_resolution", DEFAULT_RESOLUTION))


def _batch_worker(args):
    problem, variant, seed, engine, out_dir, resolution, cache_dir = args
    cfg = engine_config_from_dict({**engine, "seed": seed})
    execute_run(problem, variant, cfg, out_dir, resolution, cache_dir)
    return out_dir


def final_front(run_path: Path) -> np.ndarray:
    """Feasible non-dominated objective vectors of a stored final MP."""
    mp = read_snapshot(Path(run_path) / "final_mp.csv")
    F = mp.F[mp.feasible]
    if len(F) == 0:
        return F
    return F[nondominated_mask(F)]


def run_batch(spec: BatchSpec, out_dir, jobs: int = 1, force: bool = False,
              log=None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = out / "oracle_cache"
    for p in spec.problems:
        cached_reference(p, spec.oracle_resolution, cache)
    todo = []
    for p, v, s in spec.runs():
        path = out / run_dir_name(p, v, s)
        if force or not run_complete(path):
            todo.append((p, v, s, spec.engine, str(path), spec.oracle_resolution, str(cache)))
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for done in pool.map(_batch_worker, todo):
                if log:
                    log(f"finished {Path(done).name}")
    else:
        for item in todo:
            _batch_worker(item)
            if log:
                log(f"finished {Path(item[4]).name}")
    return summarise_batch(spec, out)


SUMMARY_HEADER = ["problem", "variant", "runs", "igd_plus_median", "igd_plus_iqr", "hv_median",
                  "hv_iqr", "igd_plus_p", "igd_plus_mark", "hv_p", "hv_mark"]


def _iqr(v: np.ndarray) -> float:
    q1, q3 = np.percentile(v, [25, 75])
    return float(q3 - q1)


def batch_scores(spec: BatchSpec, out) -> dict:
    """Per-run final IGD+ and HV recomputed from the stored final populations.

    The HV reference point per problem is the nadir of the union of every
    stored final front for that problem.
    """
    out = Path(out)
    scores = {}
    for p in spec.problems:
        ref = cached_reference(p, spec.oracle_resolution, out / "oracle_cache")
        fronts = {(v, s): final_front(out / run_dir_name(p, v, s))
                  for v in spec.variants for s in spec.seeds}
        nonempty = [F for F in fronts.values() if len(F)]
        nadir = np.max(np.vstack(nonempty), axis=0) if nonempty else None
        for (v, s), F in fronts.items():
            igd = igd_plus(ref, F) if len(F) else float("inf")
            hv = hypervolume_2d(F, nadir) if len(F) and F.shape[1] == 2 else 0.0
            scores[(p, v, s)] = (igd, hv)
    return scores


def summarise_batch(spec: BatchSpec, out) -> Path:
    out = Path(out)
    scores = batch_scores(spec, out)
    rows = []
    for p, v in sorted(spec.cells()):
        igd = np.array([scores[(p, v, s)][0] for s in spec.seeds])
        hv = np.array([scores[(p, v, s)][1] for s in spec.seeds])
        if v == spec.reference:
            marks = ["", "", "", ""]
        else:
            ref_igd = np.array([scores[(p, spec.reference, s)][0] for s in spec.seeds])
            ref_hv = np.array([scores[(p, spec.reference, s)][1] for s in spec.seeds])
            m_igd, p_igd = compare_mark(ref_igd, igd)
            m_hv, p_hv = compare_mark(-ref_hv, -hv)
            marks = [fmt(p_igd), m_igd, fmt(p_hv), m_hv]
        rows.append([p, v, str(len(spec.seeds)), fmt(np.median(igd)), fmt(_iqr(igd)),
                     fmt(np.median(hv)), fmt(_iqr(hv))] + marks)
    path = out / "summary.csv"
    with open(path, "w") as fh:
        fh.write(",".join(SUMMARY_HEADER) + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")
    with open(out / "runs.csv", "w") as fh:
        fh.write("problem,variant,seed,igd_plus,hv\n")
        for (p, v, s) in sorted(scores):
            igd, hv = scores[(p, v, s)]
            fh.write(f"{p},{v},{s},{fmt(igd)},{fmt(hv)}\n")
    return path


def load_batch_file(path) -> BatchSpec:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: invalid JSON ({exc})") from None
    return parse_batch(doc)
