"""Large-residual-budget behaviour of the planning problem.

As the residual budget grows, ``b_bar * grad V`` tends to
``s2_a / (2 rho_a^2) * E[phi((theta*_a - mu_a) / sigma_a) / sigma_a]`` where
``theta*_a`` is the largest posterior draw among the other arms.
"""
from __future__ import annotations

import numpy as np
from scipy.stats import norm

from ..belief import BeliefState, _same_len, _vec

_CHUNK = 200_000


def density_index(state: BeliefState, M: int, seed: int = 0) -> np.ndarray:
    """Monte Carlo estimate of ``E[phi((theta*_a - mu_a)/sigma_a) / sigma_a]`` for every arm.

    This equals the derivative of the Thompson-sampling probability of arm
    ``a`` with respect to its own mean. Returns the per-arm estimates.
    """
    est, _ = density_index_with_se(state, M, seed)
    return est


def density_index_with_se(state: BeliefState, M: int, seed: int = 0):
    K = state.K
    if K < 2:
        raise ValueError("density index needs at least two arms")
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(seed)
    mu, sigma = state.mu, state.sigma
    total = np.zeros(K)
    total_sq = np.zeros(K)
    done = 0
    while done < M:
        m = min(_CHUNK, M - done)
        theta = mu + sigma * rng.standard_normal((m, K))
        top2 = np.argsort(-theta, axis=1, kind="stable")[:, :2]
        first, second = np.take_along_axis(theta, top2, axis=1).T
        # best of the *other* arms
        others = np.where(np.arange(K) == top2[:, :1], second[:, None], first[:, None])
        f = norm.pdf((others - mu) / sigma) / sigma
        total += f.sum(axis=0)
        total_sq += (f * f).sum(axis=0)
        done += m
    mean = total / M
    var = np.maximum(total_sq / M - mean ** 2, 0.0)
    return mean, np.sqrt(var / M)


def asymptotic_gradient(state: BeliefState, rho, b_bar: float, s2, M: int = 100_000,
                        seed: int = 0) -> np.ndarray:
    """Large-budget approximation of the planning gradient at ``rho``.

    The limit of ``b_bar * grad V`` divided by ``b_bar``; compare with
    ``saa_subgradient`` at large ``b_bar``.
    """
    rho = _vec(rho, "rho")
    s2 = _vec(s2, "s2")
    _same_len(state=state.mu, rho=rho, s2=s2)
    if np.any(rho <= 0):
        raise ValueError("asymptotic gradient requires rho > 0")
    return s2 / (2.0 * rho ** 2) * density_index(state, M, seed) / b_bar
