"""Finite-batch environments: priors over mean rewards and per-unit reward draws."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..belief import BeliefState, _vec, as_allocation

KINDS = ("beta-bernoulli", "gamma-gumbel", "gaussian")
PRIORS = ("flat", "top-one", "top-half", "descending")
BASELINES = ("prior", "none")
BERNOULLI_S2 = 0.25
EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class EnvironmentSpec:
    """One experimental setup.

    ``kind`` picks the reward model, ``prior`` the family of per-arm priors.
    Beta and Gamma prior parameters scale with the first batch size
    ``batch_fracs[0] * n`` so difficulty stays fixed across batch sizes.
    ``s2`` is the per-unit noise variance the experimenter believes in
    (Gumbel/Gaussian); ``perturbation`` is the lognormal log-sd of the true
    variance around it. ``mu0``/``sigma2_0`` are only used by ``gaussian`` and
    are on the scaled ``h`` axis. ``baseline="prior"`` centers each arm's
    rewards at its prior mean reward before the Gaussian update, so only the
    O(1/sqrt(n)) gaps enter the aggregate; ``"none"`` uses raw rewards.
    """

    kind: str = "beta-bernoulli"
    K: int = 10
    n: int = 100
    batch_fracs: tuple = (1.0,) * 10
    prior: str = "flat"
    s2: float = 1.0
    perturbation: float = 0.0
    mu0: object = 0.0
    sigma2_0: object = 1.0
    baseline: str = "prior"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown environment {self.kind!r}; choose from {KINDS}")
        if self.prior not in PRIORS:
            raise ValueError(f"unknown prior family {self.prior!r}; choose from {PRIORS}")
        if self.K < 1 or self.n < 1 or int(self.n) != self.n:
            raise ValueError("K and n must be positive integers")
        b = tuple(float(x) for x in np.atleast_1d(self.batch_fracs))
        if not b or min(b) <= 0:
            raise ValueError("batch_fracs must be a non-empty positive sequence")
        object.__setattr__(self, "batch_fracs", b)
        if not self.s2 > 0:
            raise ValueError("s2 must be positive")
        if self.baseline not in BASELINES:
            raise ValueError(f"unknown baseline {self.baseline!r}; choose from {BASELINES}")
        if self.perturbation < 0:
            raise ValueError("perturbation must be >= 0")
        if self.kind == "beta-bernoulli" and self.perturbation > 0:
            raise ValueError("variance perturbation does not apply to Bernoulli rewards")
        if self.prior == "descending" and self.kind != "gaussian" and self.K > 100:
            raise ValueError("descending prior is defined for K <= 100")
        for t, b_t in enumerate(b):
            units = b_t * self.n
            if abs(units - round(units)) > 1e-9 or round(units) < 1:
                raise ValueError(f"epoch {t}: b_t * n = {units} is not a positive integer")

    @property
    def T(self) -> int:
        return len(self.batch_fracs)

    @property
    def scale(self) -> float:
        return self.batch_fracs[0] * self.n

    def prior_params(self):
        """Per-arm (shape_a, shape_b) for Beta, (shape, scale) for Gamma, (mean, var) for Gaussian."""
        K = self.K
        if self.kind == "gaussian":
            mu0 = np.broadcast_to(np.asarray(self.mu0, float), (K,)).copy()
            s0 = np.broadcast_to(np.asarray(self.sigma2_0, float), (K,)).copy()
            return mu0, s0
        base = self.scale
        first = np.full(K, base)
        if self.prior == "top-one":
            first[0] = 1.1 * base
        elif self.prior == "top-half":
            first[: K // 2] = 1.1 * base
        elif self.prior == "descending":
            first = base * (1.0 - np.arange(K) / 100.0)
        if self.kind == "beta-bernoulli":
            return first, np.full(K, base)
        return first, np.full(K, 1.0 / base)

    def prior_moments(self):
        """Mean and variance of the unscaled mean reward of each arm."""
        a, b = self.prior_params()
        if self.kind == "beta-bernoulli":
            tot = a + b
            return a / tot, a * b / (tot ** 2 * (tot + 1))
        if self.kind == "gamma-gumbel":
            return a * b, a * b ** 2
        root = math.sqrt(self.n)
        return a / root, b / self.n

    def baseline_reward(self) -> np.ndarray:
        """Per-arm reward subtracted before aggregation (zeros for ``baseline="none"``)."""
        if self.baseline == "none":
            return np.zeros(self.K)
        return np.asarray(self.prior_moments()[0], dtype=float)

    def model_s2(self) -> np.ndarray:
        """Per-unit variance the Gaussian policies plan with."""
        if self.kind == "beta-bernoulli":
            return np.full(self.K, BERNOULLI_S2)
        return np.full(self.K, float(self.s2))

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("kind", "K", "n", "prior", "s2", "perturbation", "baseline")}
        d["batch_fracs"] = list(self.batch_fracs)
        if self.kind == "gaussian":
            d["mu0"] = np.asarray(self.mu0, float).tolist()
            d["sigma2_0"] = np.asarray(self.sigma2_0, float).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EnvironmentSpec":
        d = dict(d)
        if "T" in d:
            T = int(d.pop("T"))
            b = d.pop("b", d.pop("batch_fracs", 1.0))
            b = np.broadcast_to(np.asarray(b, float), (T,))
            d["batch_fracs"] = tuple(b)
        elif "b" in d:
            d["batch_fracs"] = tuple(np.atleast_1d(d.pop("b")))
        known = {"kind", "K", "n", "batch_fracs", "prior", "s2", "perturbation", "mu0", "sigma2_0", "baseline"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown environment keys: {sorted(unknown)}")
        if "batch_fracs" in d:
            d["batch_fracs"] = tuple(float(x) for x in np.atleast_1d(d["batch_fracs"]))
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "EnvironmentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Instance:
    """Realized mean rewards ``m`` (unscaled) and true per-unit variances."""

    kind: str
    m: np.ndarray
    true_s2: np.ndarray
    n: int

    def __post_init__(self):
        m = _vec(self.m, "m")
        s2 = _vec(self.true_s2, "true_s2")
        if len(m) != len(s2) or np.any(s2 <= 0):
            raise ValueError("true_s2 must be a positive vector matching m")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "true_s2", s2)

    @property
    def h(self) -> np.ndarray:
        return math.sqrt(self.n) * self.m

    @property
    def K(self) -> int:
        return len(self.m)


@dataclass(frozen=True)
class BatchOutcome:
    counts: np.ndarray
    sums: np.ndarray
    agg: np.ndarray


def draw_instance(spec: EnvironmentSpec, rng: np.random.Generator) -> Instance:
    a, b = spec.prior_params()
    if spec.kind == "beta-bernoulli":
        m = rng.beta(a, b)
        true_s2 = np.clip(m * (1 - m), 1e-12, None)
    else:
        if spec.kind == "gamma-gumbel":
            m = rng.gamma(a, b)
        else:
            m = (a + np.sqrt(b) * rng.standard_normal(spec.K)) / math.sqrt(spec.n)
        true_s2 = spec.model_s2()
        if spec.perturbation > 0:
            true_s2 = true_s2 * rng.lognormal(0.0, spec.perturbation, size=spec.K)
    return Instance(spec.kind, m, true_s2, spec.n)


def centered_observation(out: BatchOutcome, alloc, baseline, b_t: float, n: int) -> np.ndarray:
    """Aggregate with each reward centered at ``baseline``, shifted back by its expectation.

    Returns ``agg - (counts - b_t n alloc) * baseline / (b_t sqrt(n))``: the
    mean is unchanged (``alloc * sqrt(n) * m``) but the multinomial count noise
    multiplies the gap ``m - baseline`` instead of the absolute reward level,
    which is what the Gaussian limit assumes.
    """
    baseline = np.asarray(baseline, dtype=float)
    expected = b_t * n * np.asarray(alloc, dtype=float)
    return out.agg - (out.counts - expected) * baseline / (b_t * math.sqrt(n))


def matched_gaussian_prior(spec: EnvironmentSpec) -> BeliefState:
    """Gaussian prior on ``h`` with the true prior's mean and variance, rescaled by ``sqrt(n)``."""
    if spec.kind == "gaussian":
        return BeliefState(*spec.prior_params())
    mean, var = spec.prior_moments()
    return BeliefState(math.sqrt(spec.n) * mean, spec.n * var)


def gumbel_scale(s2) -> np.ndarray:
    """Gumbel scale whose variance ``pi^2 scale^2 / 6`` equals ``s2``."""
    return np.sqrt(6.0 * np.asarray(s2, float)) / math.pi


def sample_rewards(inst: Instance, arm: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Per-unit rewards of one arm; used for checks, the batch sampler draws sums directly."""
    m, s2 = inst.m[arm], inst.true_s2[arm]
    if inst.kind == "beta-bernoulli":
        return (rng.random(size) < m).astype(float)
    if inst.kind == "gamma-gumbel":
        scale = gumbel_scale(s2)
        return rng.gumbel(m - scale * EULER_GAMMA, scale, size)
    return m + math.sqrt(s2) * rng.standard_normal(size)


def sample_batch(inst: Instance, alloc, b_t: float, n: int, rng: np.random.Generator) -> BatchOutcome:
    """Assign ``b_t * n`` units iid by ``alloc`` and aggregate their rewards.

    ``agg_a = sum of arm-a rewards / (b_t sqrt(n))``.
    """
    p = as_allocation(alloc, inst.K)
    units = b_t * n
    if abs(units - round(units)) > 1e-9 or round(units) < 1:
        raise ValueError(f"b_t * n = {units} is not a positive integer")
    units = int(round(units))
    counts = rng.multinomial(units, p)
    if inst.kind == "beta-bernoulli":
        sums = rng.binomial(counts, inst.m).astype(float)
    elif inst.kind == "gamma-gumbel":
        scale = gumbel_scale(inst.true_s2)
        arm = np.repeat(np.arange(inst.K), counts)
        draws = rng.gumbel(0.0, 1.0, units) * scale[arm] + (inst.m - scale * EULER_GAMMA)[arm]
        sums = np.bincount(arm, weights=draws, minlength=inst.K)
    else:
        sums = counts * inst.m + np.sqrt(counts * inst.true_s2) * rng.standard_normal(inst.K)
    sums = np.where(counts > 0, sums, 0.0)
    agg = sums / (b_t * math.sqrt(n))
    return BatchOutcome(counts, sums, agg)
