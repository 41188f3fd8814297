"""Batched experiment loops: finite batches and the Gaussian limit."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..belief import BeliefState, as_allocation, posterior_update, sample_limit_observation, select_arm
from ..planner import PlannerConfig
from ..policies import HistorySummary, Policy, PolicySpec
from .environments import (EnvironmentSpec, Instance, centered_observation, draw_instance, matched_gaussian_prior,
                           sample_batch)
from .streams import INSTANCE, REWARDS, label, stream


class PolicyError(RuntimeError):
    """A policy failed at a given epoch."""


@dataclass
class Trajectory:
    policy: str
    seed: int
    allocations: list = field(default_factory=list)
    beliefs: list = field(default_factory=list)  # T + 1 states, prior first
    observations: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    selected: int = -1
    regret: float = float("nan")
    true_means: np.ndarray | None = None

    @property
    def T(self) -> int:
        return len(self.allocations)

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "seed": self.seed,
            "selected_arm": self.selected,
            "regret": self.regret,
            "true_means": None if self.true_means is None else self.true_means.tolist(),
            "allocations": [p.tolist() for p in self.allocations],
            "observations": [y.tolist() for y in self.observations],
            "counts": [c.tolist() for c in self.counts],
            "beliefs": [b.to_dict() for b in self.beliefs],
        }


def _as_policy(policy, cfg: PlannerConfig) -> tuple[Policy, str]:
    if isinstance(policy, tuple):
        return policy
    if isinstance(policy, str):
        policy = PolicySpec.parse(policy)
    if isinstance(policy, PolicySpec):
        return policy.build(cfg), policy.id
    return policy, getattr(policy, "name", type(policy).__name__)


def simple_regret(inst: Instance, selected: int) -> float:
    """Gap between the best and the selected arm's mean reward (unscaled units)."""
    if not 0 <= selected < inst.K:
        raise ValueError(f"arm {selected} outside 0..{inst.K - 1}")
    return float(inst.m.max() - inst.m[selected])


def _allocate(policy: Policy, hist: HistorySummary, rng, t: int, pid: str) -> np.ndarray:
    seed = int(rng.integers(2 ** 63))
    try:
        return as_allocation(policy.allocate(hist, seed), hist.K)
    except Exception as exc:
        raise PolicyError(f"policy {pid!r} failed at epoch {t}: {exc}") from exc


def run_trajectory(spec: EnvironmentSpec, inst: Instance, policy, rng: np.random.Generator,
                   cfg: PlannerConfig = PlannerConfig(), seed: int = -1) -> Trajectory:
    """Run one finite-batch experiment on a fixed instance."""
    policy, pid = _as_policy(policy, cfg)
    K, n = spec.K, spec.n
    s2 = spec.model_s2()
    sched = np.asarray(spec.batch_fracs)
    prior_ab = spec.prior_params() if spec.kind == "beta-bernoulli" else None
    base = spec.baseline_reward()
    belief = matched_gaussian_prior(spec)
    counts = np.zeros(K)
    sums = np.zeros(K)
    policy.reset(K)
    traj = Trajectory(pid, seed, beliefs=[belief], true_means=inst.m)
    for t in range(spec.T):
        hist = HistorySummary(belief, counts.copy(), sums.copy(), t, sched, s2, n, prior_ab)
        p = _allocate(policy, hist, rng, t, pid)
        out = sample_batch(inst, p, sched[t], n, rng)
        counts += out.counts
        sums += out.sums
        # pre-limit recursion: same update with the scaled sample mean in place of G
        y = centered_observation(out, p, base, sched[t], n)
        belief = posterior_update(belief, p, y, sched[t], s2)
        traj.allocations.append(p)
        traj.observations.append(y)
        traj.counts.append(out.counts)
        traj.beliefs.append(belief)
    traj.selected = select_arm(belief)
    traj.regret = simple_regret(inst, traj.selected)
    return traj


def run_experiment(spec: EnvironmentSpec, policy, seed: int,
                   cfg: PlannerConfig = PlannerConfig()) -> Trajectory:
    """Draw an instance from the prior and run one finite-batch experiment.

    The instance depends on ``seed`` alone, so every policy run with the same
    seed faces the same arms; the reward stream is keyed by the policy id.
    """
    policy, pid = _as_policy(policy, cfg)
    inst = draw_instance(spec, stream(seed, INSTANCE))
    return run_trajectory(spec, inst, (policy, pid), stream(seed, REWARDS, label(pid)), cfg, seed)


def run_limit_experiment(h, policy, schedule, s2, seed: int, prior: BeliefState | None = None,
                         cfg: PlannerConfig = PlannerConfig()) -> Trajectory:
    """Gaussian sequential experiment with true scaled means ``h``.

    Each epoch observes ``G_a ~ N(p_a h_a, p_a s2_a / b_t)``. Regret is
    reported on the ``h`` scale. Policies that need unit-level counts are
    rejected since the limit has none. ``prior`` defaults to N(0, 1) per arm.
    """
    h = np.asarray(h, dtype=float)
    s2 = np.broadcast_to(np.asarray(s2, float), h.shape).copy()
    sched = np.atleast_1d(np.asarray(schedule, dtype=float))
    policy, pid = _as_policy(policy, cfg)
    if policy.needs_counts:
        raise ValueError(f"policy {pid!r} needs unit-level data and cannot run in the limit experiment")
    K = len(h)
    if prior is None:
        prior = BeliefState(np.zeros(K), np.ones(K))
    if prior.K != K:
        raise ValueError(f"prior has {prior.K} arms, h has {K}")
    rng = stream(seed, REWARDS, label(pid))
    belief = prior
    zeros = np.zeros(K)
    policy.reset(K)
    traj = Trajectory(pid, seed, beliefs=[belief], true_means=h)
    for t in range(len(sched)):
        hist = HistorySummary(belief, zeros, zeros, t, sched, s2, 1, None)
        p = _allocate(policy, hist, rng, t, pid)
        y = sample_limit_observation(h, p, rng.standard_normal(K), sched[t], s2)
        belief = posterior_update(belief, p, y, sched[t], s2)
        traj.allocations.append(p)
        traj.observations.append(y)
        traj.beliefs.append(belief)
    traj.selected = select_arm(belief)
    traj.regret = float(h.max() - h[traj.selected])
    return traj
