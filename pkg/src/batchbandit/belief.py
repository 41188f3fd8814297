"""Gaussian beliefs over scaled average rewards and their exact updates.

All quantities live on the local-parameter scale ``h = sqrt(n) * mean``.
Arms are independent, so every formula here is elementwise over arms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ALLOC_TOL = 1e-12


def _vec(x, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries: {arr}")
    return arr


def _same_len(**vectors: np.ndarray) -> int:
    lengths = {k: len(v) for k, v in vectors.items()}
    if len(set(lengths.values())) != 1:
        raise ValueError(f"dimension mismatch: {lengths}")
    return next(iter(lengths.values()))


def as_allocation(p, K: int | None = None) -> np.ndarray:
    """Validate a sampling allocation and return it as a float array."""
    p = _vec(p, "allocation")
    if K is not None and len(p) != K:
        raise ValueError(f"allocation has {len(p)} arms, expected {K}")
    if np.any(p < 0):
        raise ValueError(f"allocation has negative entries: {p}")
    if abs(p.sum() - 1.0) > ALLOC_TOL * max(1, len(p)):
        raise ValueError(f"allocation sums to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True)
class BeliefState:
    """Posterior mean ``mu`` and variance ``sigma2`` of the scaled rewards."""

    mu: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        mu = _vec(self.mu, "mu")
        sigma2 = _vec(self.sigma2, "sigma2")
        if _same_len(mu=mu, sigma2=sigma2) < 1:
            raise ValueError("a belief state needs at least one arm")
        if np.any(sigma2 <= 0):
            raise ValueError(f"sigma2 must be strictly positive: {sigma2}")
        mu.setflags(write=False)
        sigma2.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def K(self) -> int:
        return len(self.mu)

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma2)

    def to_dict(self) -> dict:
        return {"mu": self.mu.tolist(), "sigma2": self.sigma2.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BeliefState":
        return cls(np.asarray(d["mu"], float), np.asarray(d["sigma2"], float))

    @classmethod
    def from_json(cls, path) -> "BeliefState":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __eq__(self, other):
        if not isinstance(other, BeliefState):
            return NotImplemented
        return np.array_equal(self.mu, other.mu) and np.array_equal(self.sigma2, other.sigma2)

    __hash__ = None


@dataclass(frozen=True)
class MeasurementModel:
    """Per-unit reward variances, epoch lengths ``b_t`` and batch scaling ``n``."""

    s2: np.ndarray
    batch_fracs: np.ndarray
    n: int = 1

    def __post_init__(self):
        s2 = _vec(self.s2, "s2")
        b = _vec(self.batch_fracs, "batch_fracs")
        if np.any(s2 <= 0):
            raise ValueError("s2 must be strictly positive")
        if len(b) < 1 or np.any(b <= 0):
            raise ValueError("batch_fracs must be a non-empty positive vector")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "s2", s2)
        object.__setattr__(self, "batch_fracs", b)
        object.__setattr__(self, "n", int(self.n))

    @property
    def K(self) -> int:
        return len(self.s2)

    @property
    def T(self) -> int:
        return len(self.batch_fracs)

    def residual_budget(self, t: int) -> float:
        """Sum of the remaining epoch lengths ``b_t + ... + b_{T-1}``."""
        if not 0 <= t < self.T:
            raise ValueError(f"epoch {t} outside 0..{self.T - 1}")
        return float(self.batch_fracs[t:].sum())


def _check_step(state: BeliefState, alloc, b_t: float, s2):
    p = as_allocation(alloc, state.K)
    s2 = _vec(s2, "s2")
    _same_len(state=state.mu, s2=s2)
    if not (np.isfinite(b_t) and b_t > 0):
        raise ValueError(f"b_t must be positive, got {b_t}")
    if np.any(s2 <= 0):
        raise ValueError("s2 must be strictly positive")
    return p, s2


def posterior_update(state: BeliefState, alloc, y, b_t: float, s2) -> BeliefState:
    """Conjugate update of the belief after observing the scaled aggregate ``y``.

    Works unchanged for the Gaussian observation of the limit experiment and
    for the finite-batch aggregate ``sqrt(n) * mean reward``.
    """
    p, s2 = _check_step(state, alloc, b_t, s2)
    y = _vec(y, "observation")
    _same_len(state=state.mu, y=y)

    info = b_t * p / s2
    prec = 1.0 / state.sigma2 + info
    sigma2 = 1.0 / prec
    mu = sigma2 * (state.mu / state.sigma2 + b_t * y / s2)
    # zero-information arms keep their exact bits
    off = p == 0
    return BeliefState(np.where(off, state.mu, mu), np.where(off, state.sigma2, sigma2))


def sample_transition(state: BeliefState, alloc, z, b_t: float, s2) -> BeliefState:
    """Reparameterized one-step belief dynamics driven by standard normals ``z``."""
    p, s2 = _check_step(state, alloc, b_t, s2)
    z = _vec(z, "z")
    _same_len(state=state.mu, z=z)

    bp = b_t * p
    shrink = np.sqrt(bp * state.sigma2 / (s2 + bp * state.sigma2))
    mu = state.mu + state.sigma * shrink * z
    sigma2 = 1.0 / (1.0 / state.sigma2 + bp / s2)
    off = p == 0
    return BeliefState(np.where(off, state.mu, mu), np.where(off, state.sigma2, sigma2))


def sample_limit_observation(h, alloc, z, b_t: float, s2) -> np.ndarray:
    """Draw ``G_a ~ N(p_a h_a, p_a s2_a / b_t)`` from the standard normals ``z``."""
    h = _vec(h, "h")
    p = as_allocation(alloc, len(h))
    z = _vec(z, "z")
    s2 = _vec(s2, "s2")
    _same_len(h=h, z=z, s2=s2)
    if not b_t > 0:
        raise ValueError(f"b_t must be positive, got {b_t}")
    y = p * h + np.sqrt(p * s2 / b_t) * z
    return np.where(p == 0, 0.0, y)


def terminal_std(state: BeliefState, rho, b_bar: float, s2) -> np.ndarray:
    """Std of the terminal posterior mean under a constant allocation ``rho``.

    ``sqrt(sigma^4 rho b / (s2 + sigma^2 rho b))``; zero for ``rho_a * b_bar == 0``.
    """
    rho = _vec(rho, "rho")
    s2 = _vec(s2, "s2")
    _same_len(state=state.mu, rho=rho, s2=s2)
    if b_bar < 0:
        raise ValueError("b_bar must be nonnegative")
    rb = rho * b_bar
    s4 = state.sigma2 ** 2
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.sqrt(s4 * rb / (s2 + state.sigma2 * rb))
    # rb = inf is the fully informed limit
    return np.where(np.isinf(rb), state.sigma, out)


def variance_decrement(sigma2, alloc, b_t: float, s2) -> np.ndarray:
    """``sigma_t^2 - sigma_{t+1}^2`` for one epoch of sampling with ``alloc``."""
    sigma2 = _vec(sigma2, "sigma2")
    p = as_allocation(alloc, len(sigma2))
    s2 = _vec(s2, "s2")
    _same_len(sigma2=sigma2, s2=s2)
    bp = b_t * p
    return sigma2 ** 2 * bp / (s2 + sigma2 * bp)


def select_arm(state: BeliefState) -> int:
    """Arm with the highest posterior mean; ties go to the lowest index."""
    return int(np.argmax(state.mu))
