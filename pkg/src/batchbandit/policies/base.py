"""Common policy interface and the string spec format used by configs and the CLI.

Spec strings are ``kind[:key=value[:key=value...]]``, e.g. ``"rho"``,
``"ts:M=10000"``, ``"se:c=1:delta=0.1"``, ``"ttts:beta=0.5"``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..belief import BeliefState
from ..planner import PlannerConfig
from . import classic, gaussian


@dataclass
class HistorySummary:
    """What a policy may look at before choosing the allocation for epoch ``t``.

    ``counts``/``sums`` are cumulative unit counts and raw reward sums per arm;
    ``s2`` is the experimenter's per-unit variance model, not the truth.
    """

    belief: BeliefState
    counts: np.ndarray
    sums: np.ndarray
    t: int
    batch_fracs: np.ndarray
    s2: np.ndarray
    n: int = 1
    prior_ab: tuple | None = None  # Beta prior (alpha, beta) when rewards are Bernoulli

    @property
    def K(self) -> int:
        return len(self.counts)

    @property
    def empirical_means(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), 0.0)

    @property
    def successes(self) -> np.ndarray:
        return self.sums

    @property
    def failures(self) -> np.ndarray:
        return self.counts - self.sums

    @property
    def residual_budget(self) -> float:
        return float(np.sum(self.batch_fracs[self.t:]))


class Policy:
    """Maps a history summary (and an MC seed) to the next allocation."""

    name = "policy"
    needs_counts = False  # True for policies that need unit-level data

    def reset(self, K: int) -> None:
        pass

    def allocate(self, hist: HistorySummary, seed: int) -> np.ndarray:
        raise NotImplementedError


class Uniform(Policy):
    name = "uniform"

    def allocate(self, hist, seed):
        return classic.uniform_allocation(range(hist.K), hist.K)


class RHO(Policy):
    name = "rho"

    def __init__(self, cfg: PlannerConfig = PlannerConfig()):
        self.cfg = cfg

    def allocate(self, hist, seed):
        return gaussian.rho_policy_step(hist.belief, hist.t, hist.batch_fracs, hist.s2, self.cfg)


class Myopic(Policy):
    name = "myopic"

    def __init__(self, cfg: PlannerConfig = PlannerConfig()):
        self.cfg = cfg

    def allocate(self, hist, seed):
        return gaussian.myopic_allocation(hist.belief, float(hist.batch_fracs[hist.t]), hist.s2, self.cfg)


class GaussianTS(Policy):
    name = "ts"

    def __init__(self, M: int = 10_000):
        self.M = M

    def allocate(self, hist, seed):
        return gaussian.gaussian_ts_allocation(hist.belief, self.M, seed)


class TopTwoTS(Policy):
    name = "ttts"

    def __init__(self, beta: float = 0.5, M: int = 10_000):
        self.beta, self.M = beta, M

    def allocate(self, hist, seed):
        return gaussian.top_two_ts_allocation(hist.belief, self.beta, self.M, seed)


class DTS(Policy):
    name = "dts"

    def __init__(self, M: int = 10_000):
        self.M = M

    def allocate(self, hist, seed):
        return gaussian.dts_allocation(hist.belief, hist.s2, self.M, seed)


class SuccessiveElimination(Policy):
    name = "se"
    needs_counts = True

    def __init__(self, c: float = 1.0, delta: float = 0.1):
        self.c, self.delta = c, delta
        self.active = None

    def reset(self, K):
        self.active = np.arange(K)

    def allocate(self, hist, seed):
        if self.active is None:
            self.reset(hist.K)
        self.active, p = classic.successive_elimination_step(
            hist.counts, hist.empirical_means, self.c, self.delta, np.sqrt(hist.s2), self.active)
        return p


class OracleBetaBernoulliTS(Policy):
    name = "oracle-ts"
    needs_counts = True

    def __init__(self, M: int = 10_000, top_two: float | None = None):
        self.M, self.top_two = M, top_two

    def allocate(self, hist, seed):
        if hist.prior_ab is None:
            raise ValueError(f"{self.name} needs a Beta-Bernoulli environment")
        alpha, beta = hist.prior_ab
        return classic.oracle_bb_ts_step(hist.successes, hist.failures, alpha, beta,
                                         self.M, seed, top_two=self.top_two)


_KINDS = {
    "uniform": ((), lambda p, cfg: Uniform()),
    "rho": ((), lambda p, cfg: RHO(cfg)),
    "myopic": ((), lambda p, cfg: Myopic(cfg)),
    "ts": (("M",), lambda p, cfg: GaussianTS(**p)),
    "ttts": (("beta", "M"), lambda p, cfg: TopTwoTS(**p)),
    "dts": (("M",), lambda p, cfg: DTS(**p)),
    "se": (("c", "delta"), lambda p, cfg: SuccessiveElimination(**p)),
    "oracle-ts": (("M",), lambda p, cfg: OracleBetaBernoulliTS(**p)),
    "oracle-ttts": (("beta", "M"),
                    lambda p, cfg: OracleBetaBernoulliTS(p.get("M", 10_000), p.get("beta", 0.5))),
}
_INT_PARAMS = {"M"}


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown policy {self.kind!r}; choose from {sorted(_KINDS)}")
        allowed = _KINDS[self.kind][0]
        extra = set(self.params) - set(allowed)
        if extra:
            raise ValueError(f"policy {self.kind!r} does not take {sorted(extra)}")
        p = self.params
        if "M" in p and p["M"] < 1:
            raise ValueError("M must be >= 1")
        if "c" in p and not p["c"] > 0:
            raise ValueError("c must be positive")
        if "delta" in p and not 0 < p["delta"] < 1:
            raise ValueError("delta must lie in (0, 1)")
        if "beta" in p and not 0 < p["beta"] <= 1:
            raise ValueError("beta must lie in (0, 1]")

    @classmethod
    def parse(cls, text: str) -> "PolicySpec":
        kind, *parts = text.strip().split(":")
        params = {}
        for part in parts:
            key, sep, val = part.partition("=")
            if not sep:
                raise ValueError(f"bad policy parameter {part!r} in {text!r}")
            params[key] = int(val) if key in _INT_PARAMS else float(val)
        return cls(kind, params)

    @property
    def id(self) -> str:
        return ":".join([self.kind] + [f"{k}={_fmt(v)}" for k, v in self.params.items()])

    @property
    def is_tunable(self) -> bool:
        """Successive elimination without fixed constants is grid-searched by the harness."""
        return self.kind == "se" and not self.params

    def build(self, cfg: PlannerConfig = PlannerConfig()) -> Policy:
        return _KINDS[self.kind][1](dict(self.params), cfg)

    def __str__(self):
        return self.id


def _fmt(v) -> str:
    return f"{v:g}" if isinstance(v, float) else str(v)
