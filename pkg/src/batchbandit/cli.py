"""Command line entry point: ``batchbandit {solve,run,bench,hist}``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .belief import BeliefState
from .bench import (
    ExperimentConfig,
    format_table,
    ks_distance,
    regret_histogram,
    relative_gain,
    run_benchmark,
    scaling_study,
    write_records,
)
from .bench.plots import plot_regret_histograms, plot_relative_gains
from .planner import LinearConstraint, PlannerConfig, PlanningObjective, solve_extended
from .sim import run_experiment


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise SystemExit(f"cannot read {path}: {exc}")


def parse_objective(text: str) -> tuple:
    """``top-k:K[:LAMBDA]`` -> (k, entropy weight)."""
    parts = text.split(":")
    if parts[0] != "top-k" or len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected top-k:K[:LAMBDA], got {text!r}")
    try:
        return int(parts[1]), float(parts[2]) if len(parts) == 3 else 0.0
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_constraint(text: str) -> LinearConstraint:
    """``FILE:RBAR`` where FILE holds a JSON array (or {"r": [...]})."""
    path, sep, rbar = text.rpartition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected FILE:RBAR, got {text!r}")
    r = _load_json(path)
    if isinstance(r, dict):
        r = r["r"]
    return LinearConstraint(np.asarray(r, float), float(rbar))


def _planner(args, base: PlannerConfig | None = None) -> PlannerConfig:
    d = dict(vars(base)) if base is not None else {}
    if getattr(args, "samples", None) is not None:
        d["num_samples"] = args.samples
    return PlannerConfig(**d)


def cmd_solve(args) -> int:
    d = _load_json(args.config)
    state = BeliefState.from_dict(d)
    K = state.K
    s2 = np.broadcast_to(np.asarray(d.get("s2", 1.0), float), (K,)).copy()
    b_bar = args.budget if args.budget is not None else d.get("b_bar")
    if b_bar is None:
        raise SystemExit("residual budget missing: pass --budget or put b_bar in the file")
    k, lam = args.objective
    obj = PlanningObjective(k=k, entropy_weight=lam, constraint=args.constraint)
    cfg = PlannerConfig(num_samples=args.samples, seed=args.seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rho, info = solve_extended(state, float(b_bar), s2, obj, cfg, full_output=True)
    out = {"rho": rho.tolist(), "value": info.value, "iterations": info.n_iter, "converged": info.converged}
    if caught:
        out["warnings"] = [str(w.message) for w in caught]
    print(json.dumps(out))
    return 0


def _experiment(args) -> ExperimentConfig:
    d = _load_json(args.config)
    if "environment" not in d and "env" not in d:
        d = {"environment": d}
    if getattr(args, "reps", None) is not None:
        d["reps"] = args.reps
    if args.seed is not None:
        d["seed"] = args.seed
    if getattr(args, "policies", None):
        d["policies"] = args.policies
    return ExperimentConfig.from_dict(d)


def cmd_run(args) -> int:
    cfg = _experiment(args)
    policy = args.policy or cfg.policies[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = run_experiment(cfg.env, policy, cfg.seed, _planner(args, cfg.planner))
    print(json.dumps(traj.to_dict()))
    return 0


def cmd_bench(args) -> int:
    cfg = _experiment(args)
    out = Path(args.out or cfg.out or "bench_out")
    out.mkdir(parents=True, exist_ok=True)
    records = run_benchmark(cfg, threads=args.threads)
    write_records(records, out / "records.csv")
    write_records(records, out / "records.json")
    ids = {r.policy for r in records}
    baseline = "uniform" if "uniform" in ids else None
    scale = math.sqrt(cfg.env.n)
    if baseline:
        summ = relative_gain(records, baseline)
        plot_relative_gains(summ, out / "relative_regret.svg", title=f"{cfg.env.kind}, K={cfg.env.K}")
        table = format_table(summ, scale)
        (out / "summary.txt").write_text(table + "\n")
        print(table)
    else:
        print("no uniform baseline; relative regret not computed", file=sys.stderr)
    failed = sum(r.failed for r in records)
    if failed:
        print(f"{failed} trial(s) failed; see records.json", file=sys.stderr)
    print(f"wrote {len(records)} records to {out}")
    return 0


def cmd_hist(args) -> int:
    cfg = _experiment(args)
    policy = args.policy or cfg.policies[0]
    scalings = [float(x) for x in args.scalings.split(",")]
    out = Path(args.out or cfg.out or "hist_out")
    out.mkdir(parents=True, exist_ok=True)
    res = scaling_study(cfg.env, policy, scalings, cfg.reps, cfg.seed, _planner(args, cfg.planner))
    labels = {n: ("n=inf" if math.isinf(n) else f"n={n:g}") for n in res}
    samples = {labels[n]: v for n, v in res.items()}
    plot_regret_histograms(samples, out / "regret_hist.svg", bins=args.bins, title=str(policy))
    upper = max(float(np.nanmax(v)) for v in res.values())
    with open(out / "histograms.csv", "w") as fh:
        fh.write("scaling,bin_lo,bin_hi,count\n")
        for n, v in res.items():
            h = regret_histogram(v, args.bins, upper)
            for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts):
                fh.write(f"{labels[n]},{float(lo)!r},{float(hi)!r},{int(c)}\n")
    ref = next((n for n in res if math.isinf(n)), None)
    for n, v in res.items():
        line = f"{labels[n]:>10}  mean regret {np.nanmean(v):.4f}"
        if ref is not None and n != ref:
            line += f"  KS vs n=inf {ks_distance(v, res[ref]):.3f}"
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="batchbandit", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="plan the best constant allocation for a belief state")
    p.add_argument("--config", required=True, help='JSON {"mu": [...], "sigma2": [...], "s2": ..., "b_bar": ...}')
    p.add_argument("--budget", type=float, help="residual budget (overrides b_bar in the file)")
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objective", type=parse_objective, default=(1, 0.0), help="top-k:K[:LAMBDA]")
    p.add_argument("--constraint", type=parse_constraint, default=None, help="FILE:RBAR")
    p.set_defaults(func=cmd_solve)

    for name, func, hlp in (("run", cmd_run, "one trajectory as JSON"),
                            ("bench", cmd_bench, "benchmark sweep with CSV/JSON/SVG output"),
                            ("hist", cmd_hist, "regret histograms across batch scalings")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--config", required=True, help="experiment or environment JSON")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None, help="planner QMC draws")
        if name == "run":
            p.add_argument("--policy", default=None)
        else:
            p.add_argument("--reps", type=int, default=None)
            p.add_argument("--out", default=None)
        if name == "bench":
            p.add_argument("--policies", nargs="+", default=None)
            p.add_argument("--threads", type=int, default=1)
        if name == "hist":
            p.add_argument("--policy", default=None)
            p.add_argument("--scalings", default="10,100,1000,inf")
            p.add_argument("--bins", type=int, default=30)
        p.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
