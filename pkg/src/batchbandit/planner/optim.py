"""Adaptive-moment ascent and simplex geometry used by the planners."""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def adam_step(params, grad, m, v, t, lr, beta1, beta2, eps):
    """One in-place Adam *ascent* step; ``t`` is the 1-based step count."""
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for i in range(params.shape[0]):
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i]
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i]
        params[i] += lr * (m[i] / bc1) / (np.sqrt(v[i] / bc2) + eps)


@njit(cache=True)
def softmax(v):
    out = np.exp(v - v.max())
    return out / out.sum()


@njit(cache=True)
def cosine_lr(lr, it, max_iters, floor_frac):
    """Cosine decay from ``lr`` down to ``floor_frac * lr`` at ``max_iters``."""
    c = 0.5 * (1.0 + math.cos(math.pi * it / max_iters))
    return lr * (floor_frac + (1.0 - floor_frac) * c)


def project_simplex(y) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(y) + 1)
    r = np.count_nonzero(u - css / idx > 0)
    theta = css[r - 1] / r
    return np.maximum(y - theta, 0.0)


def project_simplex_halfspace(y, r, r_bar: float, iters: int = 200) -> np.ndarray:
    """Euclidean projection onto ``{x in simplex : r @ x <= r_bar}``.

    The halfspace multiplier ``nu`` enters as ``project_simplex(y - nu r)``,
    whose ``r``-value is nonincreasing in ``nu``, so bisection on ``nu``
    yields the exact projection. The feasible end of the bracket is returned.
    """
    y = np.asarray(y, dtype=float)
    r = np.asarray(r, dtype=float)
    if r.min() > r_bar:
        raise ValueError(f"infeasible constraint: min(r)={r.min()} > r_bar={r_bar}")
    # rounding slack, far below the 1e-9 feasibility promise
    bound = r_bar + 1e-12 * (1.0 + abs(r_bar) + np.abs(r).max())
    x = project_simplex(y)
    if r @ x <= bound:
        return x
    lo, hi = 0.0, 1.0
    while r @ project_simplex(y - hi * r) > bound:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("could not bracket the halfspace multiplier")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if r @ project_simplex(y - mid * r) > bound:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return project_simplex(y - hi * r)
