"""Standard-normal draw matrices for sample-average approximation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, qmc

# scipy's Sobol uses 30-bit direction numbers
SOBOL_MAX_POINTS = 2 ** 30
SOBOL_MAX_DIM = 21201


@dataclass(frozen=True)
class NormalDraws:
    z: np.ndarray
    source: str
    seed: int

    @property
    def N(self) -> int:
        return self.z.shape[0]

    @property
    def K(self) -> int:
        return self.z.shape[1]


def sobol_standard_normals(N: int, K: int, seed: int = 0) -> NormalDraws:
    """Scrambled Sobol points pushed through the inverse normal CDF.

    The first point of the sequence is skipped; together with the scrambling
    this keeps every uniform strictly inside (0, 1).
    """
    if N < 1 or K < 1:
        raise ValueError(f"need N, K >= 1, got N={N}, K={K}")
    if N + 1 > SOBOL_MAX_POINTS:
        raise ValueError(f"N={N} exceeds Sobol capacity of {SOBOL_MAX_POINTS - 1} points")
    if K > SOBOL_MAX_DIM:
        raise ValueError(f"K={K} exceeds Sobol dimension limit {SOBOL_MAX_DIM}")
    engine = qmc.Sobol(d=K, scramble=True, seed=np.random.default_rng(seed))
    engine.fast_forward(1)
    with warnings.catch_warnings():
        # balance warning for non power-of-two N is expected after the skip
        warnings.simplefilter("ignore", UserWarning)
        u = engine.random(N)
    eps = np.finfo(float).eps
    z = norm.ppf(np.clip(u, eps, 1 - eps))
    z.setflags(write=False)
    return NormalDraws(z, "qmc", int(seed))


def pseudo_standard_normals(N: int, K: int, seed: int = 0) -> NormalDraws:
    if N < 1 or K < 1:
        raise ValueError(f"need N, K >= 1, got N={N}, K={K}")
    z = np.random.default_rng(seed).standard_normal((N, K))
    z.setflags(write=False)
    return NormalDraws(z, "pseudo", int(seed))


def make_draws(N: int, K: int, seed: int = 0, qmc: bool = True) -> NormalDraws:
    if qmc:
        return sobol_standard_normals(N, K, seed)
    return pseudo_standard_normals(N, K, seed)
