"""PNG figures written next to the CSV output (headless Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .records import read_metrics, read_snapshot  # noqa: E402


def _save(fig, path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return Path(path)


def plot_run(run_dir, reference: np.ndarray | None = None) -> list[Path]:
    run_dir = Path(run_dir)
    mp = read_snapshot(run_dir / "final_mp.csv")
    fig, ax = plt.subplots(figsize=(5, 4.5))
    if reference is not None and len(reference):
        ax.plot(reference[:, 0], reference[:, 1], ".", ms=2, color="0.6", label="reference")
    feas = mp.feasible
    ax.scatter(mp.F[feas, 0], mp.F[feas, 1], s=12, label="feasible")
    if (~feas).any():
        ax.scatter(mp.F[~feas, 0], mp.F[~feas, 1], s=12, marker="x", label="infeasible")
    ax.set_xlabel("f1")
    ax.set_ylabel("f2")
    ax.legend(loc="upper right")
    out = [_save(fig, run_dir / "final_mp.png")]

    m = read_metrics(run_dir / "metrics.csv")
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    finite = np.isfinite(m["igd_plus"])
    axes[0].semilogy(m["fe"][finite], m["igd_plus"][finite])
    axes[0].set_xlabel("evaluations")
    axes[0].set_ylabel("IGD+")
    axes[1].plot(m["fe"], m["feasible_ratio"])
    axes[1].set_xlabel("evaluations")
    axes[1].set_ylabel("feasible ratio")
    out.append(_save(fig, run_dir / "metrics.png"))
    return out


def plot_oracle(out_dir, sample) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4.5))
    F = sample.F
    ax.plot(F[:, 0], F[:, 1], ",", color="0.85")
    for name in sample.label_names():
        mask = sample.labels[name]
        if mask.any():
            ax.plot(F[mask, 0], F[mask, 1], ".", ms=2, label=name)
    ax.set_xlim(-0.05, 2.05)
    ax.set_ylim(-0.05, 2.05)
    ax.set_xlabel("f1")
    ax.set_ylabel("f2")
    ax.legend(loc="upper right", fontsize=7, markerscale=4)
    return _save(fig, Path(out_dir) / "fronts.png")


def plot_batch(out_dir) -> Path:
    out_dir = Path(out_dir)
    rows = [line.split(",") for line in (out_dir / "runs.csv").read_text().splitlines()[1:]]
    problems = sorted({r[0] for r in rows})
    fig, axes = plt.subplots(1, len(problems), figsize=(4 * len(problems), 3.5), squeeze=False)
    for ax, p in zip(axes[0], problems):
        variants = sorted({r[1] for r in rows if r[0] == p})
        data = [[float(r[3]) for r in rows if r[0] == p and r[1] == v] for v in variants]
        ax.boxplot(data)
        ax.set_xticks(range(1, len(variants) + 1), variants, rotation=30)
        ax.set_yscale("log")
        ax.set_title(p)
        ax.set_ylabel("IGD+")
    return _save(fig, out_dir / "summary.png")

