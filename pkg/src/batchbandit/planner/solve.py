"""Residual-horizon planning: best constant allocation for the remaining budget."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit

from ..belief import BeliefState, _same_len, _vec
from .draws import make_draws
from .objective import value_grad
from .optim import adam_step, cosine_lr, project_simplex_halfspace, softmax


class PlannerConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    num_samples: int = 1024
    max_iters: int = 500
    step_size: float = 0.05
    betas: tuple = (0.9, 0.999)
    seed: int = 0
    qmc: bool = True
    init: object = "uniform"  # or an array of warm-start logits
    tol: float = 1e-6
    adam_eps: float = 1e-12
    lr_floor: float = 0.01

    def __post_init__(self):
        if self.num_samples < 1 or self.max_iters < 1:
            raise ValueError("num_samples and max_iters must be positive")
        if not self.step_size > 0 or not self.tol > 0:
            raise ValueError("step_size and tol must be positive")
        b1, b2 = self.betas
        if not (0 < b1 < 1 and 0 < b2 < 1):
            raise ValueError(f"moment decays must lie in (0, 1), got {self.betas}")


@dataclass(frozen=True)
class LinearConstraint:
    r: np.ndarray
    r_bar: float

    def __post_init__(self):
        object.__setattr__(self, "r", _vec(self.r, "r"))
        object.__setattr__(self, "r_bar", float(self.r_bar))


@dataclass(frozen=True)
class PlanningObjective:
    """Top-k simple-regret objective with optional entropy bonus and linear constraint.

    ``k=1, entropy_weight=0`` with no constraint is the plain planning problem.
    The bonus is ``entropy_weight * (-sum rho log rho)`` so that a positive
    weight spreads sampling effort.
    """

    k: int = 1
    entropy_weight: float = 0.0
    constraint: LinearConstraint | None = field(default=None)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass
class PlanInfo:
    value: float
    n_iter: int
    converged: bool


@lru_cache(maxsize=64)
def _cached_draws(N: int, K: int, seed: int, qmc: bool):
    return make_draws(N, K, seed, qmc).z


@njit(cache=True)
def _softmax_ascent(mu, sigma2, s2, b_bar, z, k, lam, v0, max_iters, lr, beta1, beta2, eps,
                    tol, lr_floor):
    K = mu.shape[0]
    v = v0.copy()
    m = np.zeros(K)
    s = np.zeros(K)
    g = np.empty(K)
    gv = np.empty(K)
    best_val = -np.inf
    best_rho = softmax(v)
    converged = False
    it = 0
    rho = softmax(v)
    while it < max_iters:
        val = value_grad(mu, sigma2, s2, rho, b_bar, z, k, g)
        if lam != 0.0:
            for a in range(K):
                val -= lam * rho[a] * np.log(rho[a])
                g[a] -= lam * (np.log(rho[a]) + 1.0)
        if val > best_val:
            best_val = val
            best_rho = rho.copy()
        dot = 0.0
        for a in range(K):
            dot += rho[a] * g[a]
        for a in range(K):
            gv[a] = rho[a] * (g[a] - dot)
        it += 1
        adam_step(v, gv, m, s, it, cosine_lr(lr, it - 1, max_iters, lr_floor), beta1, beta2, eps)
        new = softmax(v)
        move = np.max(np.abs(new - rho))
        rho = new
        if move < tol:
            converged = True
            break
    val = value_grad(mu, sigma2, s2, rho, b_bar, z, k, g)
    if lam != 0.0:
        for a in range(K):
            val -= lam * rho[a] * np.log(rho[a])
    if val > best_val:
        best_val = val
        best_rho = rho.copy()
    return best_rho, best_val, it, converged


def _prepare(state: BeliefState, b_bar: float, s2, cfg: PlannerConfig):
    s2 = _vec(s2, "s2")
    _same_len(state=state.mu, s2=s2)
    if not (np.isfinite(b_bar) and b_bar > 0):
        raise ValueError(f"residual budget must be positive, got {b_bar}")
    z = _cached_draws(cfg.num_samples, state.K, cfg.seed, cfg.qmc)
    return s2, z


def _init_logits(cfg: PlannerConfig, K: int) -> np.ndarray:
    if isinstance(cfg.init, str):
        if cfg.init != "uniform":
            raise ValueError(f"unknown init {cfg.init!r}")
        return np.zeros(K)
    v0 = _vec(cfg.init, "init logits")
    if len(v0) != K:
        raise ValueError(f"warm-start logits have {len(v0)} entries, expected {K}")
    return v0


def _finish(rho, info: PlanInfo, full_output: bool):
    if not info.converged:
        warnings.warn(
            f"planner stopped after {info.n_iter} iterations without meeting tol; "
            "returning best iterate", PlannerConvergenceWarning, stacklevel=3)
    rho = np.asarray(rho, dtype=float)
    return (rho, info) if full_output else rho


def solve_rho(state: BeliefState, b_bar: float, s2, cfg: PlannerConfig = PlannerConfig(),
              full_output: bool = False):
    """Allocation maximizing the SAA planning value for residual budget ``b_bar``.

    Gradient ascent on softmax logits with Adam and a cosine step decay; the
    best iterate by SAA value is returned, so the result never scores below
    the starting allocation (uniform by default).
    """
    return solve_extended(state, b_bar, s2, PlanningObjective(), cfg, full_output)


def solve_extended(state: BeliefState, b_bar: float, s2, objective: PlanningObjective,
                   cfg: PlannerConfig = PlannerConfig(), full_output: bool = False):
    s2, z = _prepare(state, b_bar, s2, cfg)
    K = state.K
    if objective.k > K:
        raise ValueError(f"k={objective.k} exceeds number of arms {K}")
    if K == 1:
        rho = np.ones(1)
        val = value_grad(state.mu, state.sigma2, s2, rho, float(b_bar), z, 1, np.empty(1))
        return _finish(rho, PlanInfo(float(val), 0, True), full_output)
    b1, b2 = cfg.betas
    if objective.constraint is None:
        rho, val, it, conv = _softmax_ascent(
            state.mu, state.sigma2, s2, float(b_bar), z, objective.k,
            float(objective.entropy_weight), _init_logits(cfg, K), cfg.max_iters,
            cfg.step_size, b1, b2, cfg.adam_eps, cfg.tol, cfg.lr_floor)
        return _finish(rho, PlanInfo(float(val), int(it), bool(conv)), full_output)
    return _projected_ascent(state, b_bar, s2, z, objective, cfg, full_output)


# gradients are evaluated no closer than this to the simplex boundary
_RHO_FLOOR = 1e-12


def _projected_ascent(state, b_bar, s2, z, objective: PlanningObjective, cfg: PlannerConfig,
                      full_output: bool):
    con = objective.constraint
    K = state.K
    if len(con.r) != K:
        raise ValueError(f"constraint has {len(con.r)} coefficients, expected {K}")
    if con.r.min() > con.r_bar:
        raise ValueError(f"infeasible constraint: min(r)={con.r.min()} > r_bar={con.r_bar}")
    lam = float(objective.entropy_weight)

    def evaluate(rho):
        g = np.empty(K)
        safe = np.maximum(rho, _RHO_FLOOR)
        val = value_grad(state.mu, state.sigma2, s2, safe, float(b_bar), z, objective.k, g)
        if lam:
            val -= lam * np.sum(safe * np.log(safe))
            g -= lam * (np.log(safe) + 1.0)
        return val, g

    # warm start: the projected unconstrained optimum, which is already the
    # answer whenever the constraint does not bind
    b1, b2 = cfg.betas
    start, *_ = _softmax_ascent(
        state.mu, state.sigma2, s2, float(b_bar), z, objective.k, lam, _init_logits(cfg, K),
        cfg.max_iters, cfg.step_size, b1, b2, cfg.adam_eps, cfg.tol, cfg.lr_floor)
    rho = project_simplex_halfspace(start, con.r, con.r_bar)
    val, g = evaluate(rho)
    eta = cfg.step_size
    converged = False
    it = 0
    while it < cfg.max_iters and not converged:
        it += 1
        # steepest feasible direction up to scale: the normal component of g
        # cannot move rho, and normalizing tames the 1/sqrt(rho) blow-up at 0
        d = g - g.mean()
        scale = np.max(np.abs(d))
        if scale == 0.0:
            converged = True
            break
        d /= scale
        while True:
            cand = project_simplex_halfspace(rho + eta * d, con.r, con.r_bar)
            if np.max(np.abs(cand - rho)) < cfg.tol:
                converged = True
                break
            cval, cg = evaluate(cand)
            if cval > val:
                rho, val, g = cand, cval, cg
                eta = min(2.0 * eta, 1.0)
                break
            eta *= 0.5
    return _finish(rho, PlanInfo(float(val), it, converged), full_output)
