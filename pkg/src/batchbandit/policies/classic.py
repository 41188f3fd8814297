"""Benchmark policies that work from raw sample counts: uniform, successive
elimination and the Beta-Bernoulli oracles."""
from __future__ import annotations

import numpy as np

from .gaussian import _argmax_frequencies


def uniform_allocation(active, K: int) -> np.ndarray:
    active = sorted(set(int(a) for a in active))
    if not active:
        raise ValueError("uniform allocation over an empty set of arms")
    if active[0] < 0 or active[-1] >= K:
        raise ValueError(f"active arms {active} outside 0..{K - 1}")
    p = np.zeros(K)
    p[active] = 1.0 / len(active)
    return p


def confidence_width(n_a, s, c: float, delta: float, K: int) -> np.ndarray:
    """``c * s * sqrt(log(n^2 K / delta) / n)``; infinite for unsampled arms."""
    n_a = np.asarray(n_a, dtype=float)
    s = np.broadcast_to(np.asarray(s, dtype=float), n_a.shape)
    out = np.full(n_a.shape, np.inf)
    seen = n_a > 0
    n = n_a[seen]
    out[seen] = c * s[seen] * np.sqrt(np.log(n * n * K / delta) / n)
    return out


def successive_elimination_step(counts, means, c: float, delta: float, s, active=None):
    """Drop every active arm whose upper bound falls below another arm's lower bound.

    Returns the surviving arm indices and the uniform allocation over them.
    The arm attaining the largest lower bound always survives.
    """
    counts = np.asarray(counts, dtype=float)
    means = np.where(counts > 0, np.asarray(means, dtype=float), 0.0)
    K = len(counts)
    if c <= 0 or not 0 < delta < 1:
        raise ValueError(f"need c > 0 and delta in (0, 1), got c={c}, delta={delta}")
    active = np.arange(K) if active is None else np.asarray(sorted(active), dtype=int)
    width = confidence_width(counts, s, c, delta, K)
    lcb = np.where(np.isinf(width), -np.inf, means - width)
    ucb = np.where(np.isinf(width), np.inf, means + width)
    best_lcb = lcb[active].max()
    keep = active[ucb[active] >= best_lcb]
    return keep, uniform_allocation(keep, K)


def beta_posterior(successes, failures, alpha, beta):
    successes = np.asarray(successes, dtype=float)
    failures = np.asarray(failures, dtype=float)
    if np.any(successes < 0) or np.any(failures < 0):
        raise ValueError("success/failure counts must be nonnegative")
    return np.asarray(alpha, dtype=float) + successes, np.asarray(beta, dtype=float) + failures


def oracle_bb_ts_step(successes, failures, alpha, beta, M: int = 10_000, seed: int = 0,
                      top_two: float | None = None) -> np.ndarray:
    """Batch Thompson sampling with the exact Beta-Bernoulli posterior.

    ``top_two`` is the leader probability of the top-two variant; ``None``
    gives plain Thompson sampling.
    """
    a_post, b_post = beta_posterior(successes, failures, alpha, beta)
    K = len(a_post)

    def sample(rng, m):
        return rng.beta(a_post, b_post, size=(m, K))

    return _argmax_frequencies(sample, K, M, seed, beta=top_two)
