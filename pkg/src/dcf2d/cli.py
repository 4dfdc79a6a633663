"""Command-line entry point: ``dcf2d run | oracle | batch | metrics``.

Exit codes: 0 success, 1 runtime failure, 2 invalid usage or configuration.
The default output root comes from ``DCF2D_OUTPUT_ROOT`` (current directory
if unset).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .engine import EngineConfig, Variant
from .metrics import hypervolume_2d, igd_plus
from .operators import DEConfig
from .oracle import classify_coupling, label_fronts, sample_grid
from .problems import REGISTRY, get_problem
from .records import read_snapshot, write_oracle, write_points


class UsageError(Exception):
    pass


def _problem(name: str) -> str:
    if name not in REGISTRY:
        raise UsageError(f"unknown problem {name!r}; registered problems: {', '.join(sorted(REGISTRY))}")
    return name


def _variant(name: str) -> str:
    try:
        return Variant.parse(name).value
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _out(args, default_name: str) -> Path:
    return Path(args.out) if args.out else harness.output_root() / default_name


def cmd_run(args) -> int:
    problem = _problem(args.problem)
    variant = _variant(args.variant)
    try:
        de = DEConfig(F=args.F, CR=args.CR, p_best_frac=args.p_best)
        cfg = EngineConfig(N=args.pop, max_fe=args.max_fe, beta=args.beta, seed=args.seed, de=de)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.snapshots is not None and args.snapshots < 1:
        raise UsageError("--snapshots must be a positive generation interval")
    out = _out(args, harness.run_dir_name(problem, variant, args.seed))
    cache = harness.output_root() / "oracle_cache" if args.cache else None
    result = harness.execute_run(problem, variant, cfg, out, args.resolution, cache, args.snapshots)
    igd = result.timeline[-1][2]
    print(f"problem={problem} variant={variant} seed={args.seed} generations={result.generations} "
          f"fe={result.fe_used} igd_plus={igd!r}")
    if args.plot:
        from .plotting import plot_run
        ref = harness.cached_reference(problem, args.resolution, cache)
        for path in plot_run(out, ref):
            print(f"wrote {path}")
    return 0


def cmd_oracle(args) -> int:
    problem = get_problem(_problem(args.problem))
    if args.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    out = _out(args, f"oracle__{problem.name}__{args.resolution}")
    sample = label_fronts(sample_grid(problem, args.resolution), args.tol)
    classify_coupling(sample)
    _, summary = write_oracle(sample, out, args.all_points)
    write_points(Path(out) / "reference.csv", harness.cached_reference(problem.name, args.resolution))
    sys.stdout.write(summary.read_text())
    if args.plot:
        from .plotting import plot_oracle
        print(f"wrote {plot_oracle(out, sample)}")
    return 0


def cmd_batch(args) -> int:
    try:
        spec = harness.load_batch_file(args.config)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {args.config}") from None
    except harness.ConfigError as exc:
        raise UsageError(f"invalid batch config: {exc}") from None
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    out = Path(args.out) if args.out else (Path(spec.output) if spec.output else harness.output_root() / "batch")
    log = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    summary = harness.run_batch(spec, out, jobs=args.jobs, force=args.force, log=log)
    sys.stdout.write(summary.read_text())
    if args.plot:
        from .plotting import plot_batch
        print(f"wrote {plot_batch(out)}")
    return 0


def cmd_metrics(args) -> int:
    problem = _problem(args.problem)
    path = Path(args.front)
    if path.is_dir():
        path = path / "final_mp.csv"
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    mp = read_snapshot(path)
    F = mp.F[mp.feasible]
    ref = harness.cached_reference(problem, args.resolution)
    point = np.asarray(args.ref_point, dtype=float) if args.ref_point else ref.max(axis=0)
    igd = igd_plus(ref, F) if len(F) else float("inf")
    hv = hypervolume_2d(F, point) if len(F) else 0.0
    print(f"igd_plus={igd!r} hv={hv!r} feasible={len(F)}/{len(mp)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcf2d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one optimisation run")
    p.add_argument("--problem", required=True)
    p.add_argument("--variant", default="dcf2d", help="dcf2d, dcf2d-pos, dcf2d-neg, dcf2d-nos3 or cdp")
    p.add_argument("--pop", type=int, default=100)
    p.add_argument("--max-fe", type=int, default=100_000)
    p.add_argument("--beta", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--F", type=float, default=0.5)
    p.add_argument("--CR", type=float, default=0.9)
    p.add_argument("--p-best", type=float, default=0.1)
    p.add_argument("--resolution", type=int, default=harness.DEFAULT_RESOLUTION,
                   help="oracle grid used for the IGD+ reference set")
    p.add_argument("--snapshots", type=int, metavar="EVERY_G", help="dump all populations every G generations")
    p.add_argument("--cache", action="store_true", help="cache the reference set under the output root")
    p.add_argument("--out")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="label a dense grid and classify the coupling type")
    p.add_argument("--problem", required=True)
    p.add_argument("--resolution", type=int, default=harness.DEFAULT_RESOLUTION)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--all-points", action="store_true", help="write unlabelled grid points too")
    p.add_argument("--out")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("batch", help="problems x variants x seeds with summary statistics")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--force", action="store_true", help="rerun completed runs")
    p.add_argument("--out")
    p.add_argument("--plot", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("metrics", help="IGD+ and HV of a stored final population")
    p.add_argument("--front", required=True, help="final_mp.csv or a run directory")
    p.add_argument("--problem", required=True)
    p.add_argument("--resolution", type=int, default=harness.DEFAULT_RESOLUTION)
    p.add_argument("--ref-point", type=float, nargs=2)
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dcf2d: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"dcf2d: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
