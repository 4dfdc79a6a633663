"""CSV/JSON persistence for runs, snapshots and oracle output.

Floats are written with ``repr`` so every value reads back to the same
binary double, and nothing time- or host-dependent is ever written, so
files depend only on the run configuration and seed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .core import Population
from .engine import EngineConfig, RunResult

EVENT_HEADER = ["generation", "fe", "kind", "payload"]
METRIC_HEADER = ["generation", "fe", "igd_plus", "hv", "feasible_ratio"]

RUN_FILES = ("final_mp.csv", "events.csv", "metrics.csv", "config.json")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def snapshot_header(n_var: int, n_obj: int, n_con: int) -> list[str]:
    return (["gen", "pop_kind", "member_index"]
            + [f"x_{j + 1}" for j in range(n_var)]
            + [f"f_{j + 1}" for j in range(n_obj)]
            + [f"c_{j + 1}" for j in range(n_con)]
            + ["cv", "direction_flag"])


def _snapshot_rows(generation: int, kind: str, pop: Population, direction: str = ""):
    for i in range(len(pop)):
        yield ([str(generation), kind, str(i)]
               + [fmt(v) for v in pop.X[i]] + [fmt(v) for v in pop.F[i]]
               + [fmt(v) for v in pop.C[i]] + [fmt(pop.CV[i]), direction])


def write_snapshots(path, records, dims: tuple[int, int, int]) -> None:
    """Write ``(generation, kind, population, direction)`` records to one CSV."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(snapshot_header(*dims))
        for generation, kind, pop, direction in records:
            w.writerows(_snapshot_rows(generation, kind, pop, direction))


def write_snapshot(pop: Population, path, generation: int, kind: str = "MP",
                   direction: str = "") -> None:
    write_snapshots(path, [(generation, kind, pop, direction)], (pop.n_var, pop.n_obj, pop.n_con))


def read_snapshots(path) -> list[tuple[int, str, Population, str]]:
    """Inverse of :func:`write_snapshots`; populations come back bit-exact."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    xs = [j for j, h in enumerate(header) if h.startswith("x_")]
    fs = [j for j, h in enumerate(header) if h.startswith("f_")]
    cs = [j for j, h in enumerate(header) if h.startswith("c_")]
    groups: dict[tuple[int, str], list] = {}
    for row in rows[1:]:
        groups.setdefault((int(row[0]), row[1]), []).append(row)
    out = []
    for (gen, kind), members in groups.items():
        members.sort(key=lambda r: int(r[2]))
        X = np.array([[float(r[j]) for j in xs] for r in members]).reshape(-1, len(xs))
        F = np.array([[float(r[j]) for j in fs] for r in members]).reshape(-1, len(fs))
        C = np.array([[float(r[j]) for j in cs] for r in members]).reshape(-1, len(cs))
        CV = np.array([float(r[-2]) for r in members])
        ids = np.array([int(r[2]) for r in members], dtype=np.int64)
        out.append((gen, kind, Population(X, F, C, CV, ids), members[0][-1]))
    return out


def read_snapshot(path) -> Population:
    """The single population stored in ``path`` (empty if header only)."""
    records = read_snapshots(path)
    if not records:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh))
        d = sum(h.startswith("x_") for h in header)
        m = sum(h.startswith("f_") for h in header)
        k = sum(h.startswith("c_") for h in header)
        return Population.empty(d, m, k)
    if len(records) > 1:
        raise ValueError(f"{path} holds {len(records)} populations")
    return records[0][2]


def _write_table(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def config_echo(result: RunResult) -> dict:
    cfg = asdict(result.config)
    return {"problem": result.problem, "variant": result.variant, "seed": result.seed,
            "generations": result.generations, "fe_used": result.fe_used, "engine": cfg}


def write_run(result: RunResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mp = result.final_mp
    write_snapshot(mp, out / "final_mp.csv", result.generations, "MP")
    _write_table(out / "events.csv", EVENT_HEADER,
                 ([e.generation, e.fe, e.kind, e.payload] for e in result.events))
    _write_table(out / "metrics.csv", METRIC_HEADER,
                 ([g, fe, fmt(igd), fmt(hv), fmt(r)] for g, fe, igd, hv, r in result.timeline))
    if result.snapshots:
        records = [(gen, kind, pop, flag) for gen, pops in result.snapshots for kind, pop, flag in pops]
        write_snapshots(out / "snapshots.csv", records, (mp.n_var, mp.n_obj, mp.n_con))
    with open(out / "config.json", "w") as fh:
        json.dump(config_echo(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def read_metrics(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {h: np.array([float(r[h]) for r in rows]) for h in METRIC_HEADER}


def read_events(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def engine_config_from_dict(d: dict) -> EngineConfig:
    from .operators import DEConfig
    d = dict(d)
    if "de" in d and isinstance(d["de"], dict):
        d["de"] = DEConfig(**d["de"])
    return EngineConfig(**d)


def write_points(path, P: np.ndarray) -> None:
    P = np.atleast_2d(P)
    _write_table(path, [f"f_{j + 1}" for j in range(P.shape[1])], ([fmt(v) for v in row] for row in P))


def read_points(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in r] for r in rows[1:]]).reshape(len(rows) - 1, len(rows[0]))


def write_oracle(sample, out_dir, all_points: bool = False) -> tuple[Path, Path]:
    """Labelled point cloud (``points.csv``) and ``summary.txt`` for a labelled grid."""
    from .oracle import classify_coupling, relevant_constraints
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = sample.label_names()
    L = np.column_stack([sample.labels[n] for n in names])
    keep = np.arange(len(sample)) if all_points else np.flatnonzero(L.any(axis=1))
    n_var = sample.X.shape[1]
    header = ([f"x_{j + 1}" for j in range(n_var)] + [f"f_{j + 1}" for j in range(sample.F.shape[1])]
              + [f"c_{j + 1}" for j in range(sample.n_con)] + ["cv"] + names)
    rows = ([fmt(v) for v in sample.X[i]] + [fmt(v) for v in sample.F[i]]
            + [fmt(v) for v in sample.C[i]] + [fmt(sample.CV[i])] + [str(int(b)) for b in L[i]]
            for i in keep)
    points = out / "points.csv"
    _write_table(points, header, rows)
    ctype = classify_coupling(sample)
    relevant = relevant_constraints(sample)
    lines = [f"problem={sample.problem}", f"resolution={sample.resolution}",
             f"type={ctype.value}", f"grid_points={len(sample)}",
             f"relevant_constraints={','.join(str(i + 1) for i in relevant)}"]
    lines += [f"count_{n}={int(sample.labels[n].sum())}" for n in names]
    summary = out / "summary.txt"
    summary.write_text("\n".join(lines) + "\n")
    return points, summary
