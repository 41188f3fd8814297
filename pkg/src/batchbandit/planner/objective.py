"""Sample-average planning objective and its envelope subgradient.

The numpy functions are the readable reference. ``value_grad`` is the
compiled kernel the solvers call in their inner loop; tests hold it to the
reference.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ..belief import BeliefState, _same_len, _vec, terminal_std
from .draws import NormalDraws


def _terminal_std_grad(state: BeliefState, rho: np.ndarray, b_bar: float, s2: np.ndarray) -> np.ndarray:
    std = terminal_std(state, rho, b_bar, s2)
    denom = s2 + state.sigma2 * rho * b_bar
    return state.sigma2 ** 2 * b_bar * s2 / (2.0 * std * denom ** 2)


def _z(draws) -> np.ndarray:
    return draws.z if isinstance(draws, NormalDraws) else np.asarray(draws, dtype=float)


def _topk_mask(x: np.ndarray, k: int) -> np.ndarray:
    # stable sort on -x: among equal values the lower index ranks first
    order = np.argsort(-x, axis=1, kind="stable")[:, :k]
    mask = np.zeros(x.shape, dtype=bool)
    np.put_along_axis(mask, order, True, axis=1)
    return mask


def saa_value(state: BeliefState, rho, b_bar: float, s2, draws, k: int = 1) -> float:
    """``mean_j sum(top-k_a {mu_a + std_a(rho) z_ja})``; ``k=1`` is the planning value."""
    rho = _vec(rho, "rho")
    s2 = _vec(s2, "s2")
    z = _z(draws)
    _same_len(state=state.mu, rho=rho, s2=s2, z=z[0])
    x = state.mu + terminal_std(state, rho, b_bar, s2) * z
    if k == 1:
        return float(x.max(axis=1).mean())
    return float(np.where(_topk_mask(x, k), x, 0.0).sum(axis=1).mean())


def saa_subgradient(state: BeliefState, rho, b_bar: float, s2, draws, k: int = 1) -> np.ndarray:
    """Envelope subgradient of :func:`saa_value` with respect to ``rho``."""
    rho = _vec(rho, "rho")
    s2 = _vec(s2, "s2")
    z = _z(draws)
    _same_len(state=state.mu, rho=rho, s2=s2, z=z[0])
    if np.any(rho <= 0):
        raise ValueError("subgradient is singular at rho_a = 0")
    std = terminal_std(state, rho, b_bar, s2)
    x = state.mu + std * z
    if k == 1:
        mask = np.zeros(x.shape, dtype=bool)
        mask[np.arange(len(x)), np.argmax(x, axis=1)] = True
    else:
        mask = _topk_mask(x, k)
    weight = np.where(mask, z, 0.0).mean(axis=0)
    return weight * _terminal_std_grad(state, rho, b_bar, s2)


def shannon_entropy(rho) -> float:
    rho = np.asarray(rho, dtype=float)
    nz = rho > 0
    return float(-np.sum(rho[nz] * np.log(rho[nz])))


@njit(cache=True)
def value_grad(mu, sigma2, s2, rho, b_bar, z, k, grad):
    """Fused SAA value and envelope subgradient; writes the gradient into ``grad``."""
    N, K = z.shape
    std = np.empty(K)
    dstd = np.empty(K)
    for a in range(K):
        rb = rho[a] * b_bar
        denom = s2[a] + sigma2[a] * rb
        std[a] = np.sqrt(sigma2[a] * sigma2[a] * rb / denom)
        if std[a] > 0.0:
            dstd[a] = sigma2[a] * sigma2[a] * b_bar * s2[a] / (2.0 * std[a] * denom * denom)
        else:
            dstd[a] = np.inf
        grad[a] = 0.0
    total = 0.0
    row = np.empty(K)
    for j in range(N):
        if k == 1:
            best = mu[0] + std[0] * z[j, 0]
            arg = 0
            for a in range(1, K):
                x = mu[a] + std[a] * z[j, a]
                if x > best:
                    best = x
                    arg = a
            total += best
            grad[arg] += z[j, arg]
        else:
            for a in range(K):
                row[a] = -(mu[a] + std[a] * z[j, a])
            order = np.argsort(row, kind="mergesort")
            for i in range(k):
                a = order[i]
                total -= row[a]
                grad[a] += z[j, a]
    for a in range(K):
        if grad[a] != 0.0:
            grad[a] = grad[a] / N * dstd[a]
    return total / N
