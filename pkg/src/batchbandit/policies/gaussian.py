"""Allocation rules that act on the Gaussian belief state."""
from __future__ import annotations

import numpy as np

from ..belief import BeliefState, _vec
from ..planner import PlannerConfig, density_index, solve_rho

_CHUNK = 100_000
RESAMPLE_CAP = 100


def _argmax_frequencies(sample, K: int, M: int, seed: int, beta: float | None = None,
                        cap: int = RESAMPLE_CAP) -> np.ndarray:
    """Frequency with which each arm is credited over ``M`` posterior draws.

    ``sample(rng, m)`` returns an ``(m, K)`` array of joint posterior draws.
    With ``beta`` set, the top-two rule applies: the leader is credited with
    probability ``beta``, otherwise draws are repeated until another arm
    leads (at most ``cap`` times, then the first draw's runner-up is used).
    Primary draws come from ``default_rng(seed)`` alone so that ``beta=1``
    reproduces plain Thompson sampling exactly.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(seed)
    aux = np.random.default_rng([seed, 1])
    counts = np.zeros(K, dtype=np.int64)
    done = 0
    while done < M:
        m = min(_CHUNK, M - done)
        theta = sample(rng, m)
        leader = np.argmax(theta, axis=1)
        credited = leader.copy()
        if beta is not None and K > 1:
            pending = np.flatnonzero(aux.random(m) >= beta)
            if pending.size:
                runner_up = np.argsort(-theta[pending], axis=1, kind="stable")[:, 1]
                fallback = dict(zip(pending.tolist(), runner_up.tolist()))
                for _ in range(cap):
                    if not pending.size:
                        break
                    redraw = np.argmax(sample(aux, pending.size), axis=1)
                    ok = redraw != leader[pending]
                    credited[pending[ok]] = redraw[ok]
                    pending = pending[~ok]
                for i in pending.tolist():
                    credited[i] = fallback[i]
        counts += np.bincount(credited, minlength=K)
        done += m
    return counts / M


def _gaussian_sampler(state: BeliefState):
    mu, sigma = state.mu, state.sigma
    return lambda rng, m: mu + sigma * rng.standard_normal((m, len(mu)))


def gaussian_ts_allocation(state: BeliefState, M: int = 10_000, seed: int = 0) -> np.ndarray:
    """Monte Carlo posterior probability that each arm is the best."""
    return _argmax_frequencies(_gaussian_sampler(state), state.K, M, seed)


def top_two_ts_allocation(state: BeliefState, beta: float = 0.5, M: int = 10_000,
                          seed: int = 0) -> np.ndarray:
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return _argmax_frequencies(_gaussian_sampler(state), state.K, M, seed, beta=beta)


def dts_index(state: BeliefState, a: int, s2=None, M: int = 10_000, seed: int = 0) -> float:
    """``E[phi((theta*_a - mu_a)/sigma_a) / sigma_a]``, the sensitivity of arm ``a``'s
    Thompson probability to its own mean.

    ``s2`` does not enter the index; it is accepted so the call matches
    ``dts_allocation``.
    """
    if state.K < 2:
        raise ValueError("the index is undefined for a single arm")
    return float(density_index(state, M, seed)[a])


def dts_allocation(state: BeliefState, s2, M: int = 10_000, seed: int = 0) -> np.ndarray:
    """Density Thompson sampling: weights ``s_a * sqrt(index_a)``, normalized."""
    s2 = _vec(s2, "s2")
    if state.K == 1:
        return np.ones(1)
    w = np.sqrt(s2 * density_index(state, M, seed))
    return w / w.sum()


def myopic_allocation(state: BeliefState, b_t: float, s2, cfg: PlannerConfig = PlannerConfig()):
    """Plan for the next batch only."""
    return solve_rho(state, b_t, s2, cfg)


def rho_policy_step(state: BeliefState, t: int, schedule, s2,
                    cfg: PlannerConfig = PlannerConfig()) -> np.ndarray:
    """Plan a constant allocation for the whole remaining budget ``sum(schedule[t:])``."""
    schedule = _vec(schedule, "schedule")
    if not 0 <= t < len(schedule):
        raise ValueError(f"epoch {t} outside 0..{len(schedule) - 1}")
    return solve_rho(state, float(schedule[t:].sum()), s2, cfg)
