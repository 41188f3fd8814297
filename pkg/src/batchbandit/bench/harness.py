"""Benchmark sweeps with common random numbers across policies."""
from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from ..planner import PlannerConfig
from ..policies import PolicySpec
from ..sim import EnvironmentSpec, draw_instance, matched_gaussian_prior, run_experiment, run_limit_experiment
from ..sim.streams import INSTANCE, stream

log = logging.getLogger(__name__)

DEFAULT_SE_GRID = {"c": (0.5, 1.0, 2.0), "delta": (0.1, 0.05)}


def replication_seed(master_seed: int, rep: int) -> int:
    """Seed of replication ``rep``; ``run_experiment`` with it reproduces the trial."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(rep),))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


@dataclass(frozen=True)
class TrialRecord:
    """One (policy, replication) outcome. Failed trials carry NaN regret and arm -1."""

    policy: str
    replication: int
    seed: int
    regret: float
    selected_arm: int
    allocation_summary: tuple | None = field(default=None, compare=False)  # mean allocation over epochs
    error: str | None = field(default=None, compare=False)

    def __eq__(self, other):
        if not isinstance(other, TrialRecord):
            return NotImplemented
        same_regret = self.regret == other.regret or (math.isnan(self.regret) and math.isnan(other.regret))
        return (self.policy, self.replication, self.seed, self.selected_arm) == (
            other.policy, other.replication, other.seed, other.selected_arm) and same_regret

    __hash__ = None

    @property
    def failed(self) -> bool:
        return self.error is not None or math.isnan(self.regret)


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvironmentSpec
    policies: tuple
    reps: int = 100
    seed: int = 0
    out: str | None = None
    se_grid: dict = field(default_factory=lambda: dict(DEFAULT_SE_GRID))
    planner: PlannerConfig = PlannerConfig()

    def __post_init__(self):
        pols = tuple(p if isinstance(p, PolicySpec) else PolicySpec.parse(p) for p in self.policies)
        if not pols:
            raise ValueError("at least one policy is required")
        ids = [p.id for p in pols]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate policies in {ids}")
        object.__setattr__(self, "policies", pols)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        grid = {k: tuple(float(x) for x in self.se_grid.get(k, ())) for k in ("c", "delta")}
        if any(not v for v in grid.values()):
            raise ValueError("se_grid needs non-empty 'c' and 'delta' lists")
        object.__setattr__(self, "se_grid", grid)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        env = EnvironmentSpec.from_dict(d.pop("environment", d.pop("env", {})))
        planner = d.pop("planner", None)
        if planner is not None and not isinstance(planner, PlannerConfig):
            planner = dict(planner)
            if "betas" in planner:
                planner["betas"] = tuple(planner["betas"])
            planner = PlannerConfig(**planner)
        kw = {k: d.pop(k) for k in ("reps", "seed", "out", "se_grid") if k in d}
        policies = d.pop("policies", ("uniform",))
        if d:
            raise ValueError(f"unknown config keys: {sorted(d)}")
        return cls(env, tuple(policies), planner=planner or PlannerConfig(), **kw)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _se_variants(spec: PolicySpec, grid: dict) -> list:
    if not spec.is_tunable:
        return [spec]
    return [PolicySpec("se", {"c": c, "delta": d}) for c, d in product(grid["c"], grid["delta"])]


def _trial(env: EnvironmentSpec, spec: PolicySpec, rep: int, seed: int, planner: PlannerConfig) -> TrialRecord:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            traj = run_experiment(env, spec, seed, planner)
    except Exception as exc:  # recorded, the sweep goes on
        log.warning("trial failed: policy=%s rep=%d: %s", spec.id, rep, exc)
        return TrialRecord(spec.id, rep, seed, float("nan"), -1, None, f"{type(exc).__name__}: {exc}")
    summary = tuple(np.mean(traj.allocations, axis=0).tolist())
    return TrialRecord(spec.id, rep, seed, traj.regret, traj.selected, summary)


def _run_chunk(env, specs, reps, master_seed, planner):
    return [_trial(env, s, r, replication_seed(master_seed, r), planner) for r in reps for s in specs]


def run_benchmark(cfg: ExperimentConfig, threads: int = 1) -> list:
    """Run every policy on ``cfg.reps`` shared instances.

    Replication ``r`` draws its instance from ``replication_seed(seed, r)``, so
    all policies face the same arms; reward streams are keyed per policy.
    A bare ``se`` entry is grid-searched over ``cfg.se_grid`` and only the
    combination with the lowest mean regret is returned. Output is sorted by
    (policy, replication) and does not depend on ``threads``.
    """
    specs = {}
    for p in cfg.policies:
        specs.update((s.id, s) for s in _se_variants(p, cfg.se_grid))
    specs = list(specs.values())
    reps = list(range(cfg.reps))
    if threads <= 1:
        records = _run_chunk(cfg.env, specs, reps, cfg.seed, cfg.planner)
    else:
        chunks = [reps[i::threads] for i in range(threads) if reps[i::threads]]
        with ProcessPoolExecutor(max_workers=threads) as ex:
            futs = [ex.submit(_run_chunk, cfg.env, specs, c, cfg.seed, cfg.planner) for c in chunks]
            records = [rec for f in futs for rec in f.result()]
    records = _keep_best_se(records, cfg)
    return sort_records(records)


def _keep_best_se(records: list, cfg: ExperimentConfig) -> list:
    if not any(p.is_tunable for p in cfg.policies):
        return records
    grid_ids = [s.id for s in _se_variants(PolicySpec("se"), cfg.se_grid)]
    fixed = {p.id for p in cfg.policies if not p.is_tunable}
    scores = {}
    for gid in grid_ids:
        r = np.array([x.regret for x in sort_records(records) if x.policy == gid])
        scores[gid] = np.nanmean(r) if np.isfinite(r).any() else np.inf
    best = min(grid_ids, key=lambda g: scores[g])  # ties go to the first grid point
    log.info("successive elimination grid: %s; best %s", scores, best)
    return [x for x in records if x.policy == best or x.policy in fixed]


def sort_records(records) -> list:
    return sorted(records, key=lambda r: (r.policy, r.replication))


def _scaled_trial(env: EnvironmentSpec, spec: PolicySpec, n, seed: int, planner: PlannerConfig) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if math.isinf(n):
            inst = draw_instance(env, stream(seed, INSTANCE))
            traj = run_limit_experiment(inst.h, spec, env.batch_fracs, env.model_s2(), seed,
                                        prior=matched_gaussian_prior(env), cfg=planner)
            return traj.regret
        scaled = EnvironmentSpec.from_dict({**env.to_dict(), "n": int(n)})
        return run_experiment(scaled, spec, seed, planner).regret * math.sqrt(n)


def scaling_study(env: EnvironmentSpec, policy, scalings, reps: int, seed: int = 0,
                  planner: PlannerConfig = PlannerConfig()) -> dict:
    """Regret on the ``h`` scale (``sqrt(n)`` times the gap) for each batch scaling ``n``.

    ``inf`` runs the Gaussian sequential experiment on ``h = sqrt(n) m`` with
    instances drawn from ``env`` at its own ``n``, so it shares instances with
    the finite run at that ``n``. Other scalings keep the batch fractions and
    rescale the prior with ``n``.
    """
    spec = policy if isinstance(policy, PolicySpec) else PolicySpec.parse(policy)
    out = {}
    for n in scalings:
        n = float(n)
        out[n] = np.array([_scaled_trial(env, spec, n, replication_seed(seed, r), planner)
                           for r in range(reps)])
    return out
