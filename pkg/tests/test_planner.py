import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from batchbandit.belief import BeliefState, terminal_std
from batchbandit.planner import (
    LinearConstraint,
    PlannerConfig,
    PlannerConvergenceWarning,
    PlanningObjective,
    asymptotic_gradient,
    density_index,
    make_draws,
    project_simplex,
    project_simplex_halfspace,
    pseudo_standard_normals,
    saa_subgradient,
    saa_value,
    shannon_entropy,
    sobol_standard_normals,
    solve_extended,
    solve_rho,
)
from batchbandit.planner.objective import value_grad


def rand_state(rng, K):
    return BeliefState(rng.normal(0, 0.5, K), rng.uniform(0.5, 1.5, K))


# draws

def test_sobol_deterministic_and_finite():
    a = sobol_standard_normals(1024, 3, seed=7)
    b = sobol_standard_normals(1024, 3, seed=7)
    np.testing.assert_array_equal(a.z, b.z)
    assert np.all(np.isfinite(a.z))
    assert a.source == "qmc" and a.N == 1024 and a.K == 3
    assert not np.array_equal(a.z, sobol_standard_normals(1024, 3, seed=8).z)


def test_sobol_moments():
    z = sobol_standard_normals(1024, 2, seed=0).z
    assert np.all(np.abs(z.mean(axis=0)) <= 0.1)
    assert np.all(np.abs(z.var(axis=0) - 1) <= 0.15)


def test_sobol_capacity_error():
    with pytest.raises(ValueError):
        sobol_standard_normals(2 ** 30, 2)
    with pytest.raises(ValueError):
        sobol_standard_normals(0, 2)


def test_pseudo_draws():
    d = make_draws(10, 2, seed=1, qmc=False)
    assert d.source == "pseudo"
    np.testing.assert_array_equal(d.z, pseudo_standard_normals(10, 2, 1).z)


# objective

def test_saa_value_single_arm_symmetric():
    z = np.array([[1.3], [-1.3], [0.4], [-0.4]])
    st_ = BeliefState([0.37], [2.0])
    assert saa_value(st_, [1.0], 3.0, [1.0], z) == pytest.approx(0.37, abs=1e-15)
    assert saa_subgradient(st_, [1.0], 3.0, [1.0], z)[0] == pytest.approx(0.0, abs=1e-15)


def test_saa_value_two_identical_arms():
    st_ = BeliefState([0.0, 0.0], [1.0, 1.0])
    z = np.array([[1.0, -1.0], [-1.0, 1.0]])
    c = terminal_std(st_, [0.5, 0.5], 4.0, [1.0, 1.0])[0]
    assert saa_value(st_, [0.5, 0.5], 4.0, [1.0, 1.0], z) == pytest.approx(c, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_saa_value_dominates_best_mean(K, seed):
    rng = np.random.default_rng(seed)
    st_ = rand_state(rng, K)
    z = rng.standard_normal((64, K))
    z = np.vstack([z, -z])
    rho = rng.dirichlet(np.ones(K))
    assert saa_value(st_, rho, 5.0, np.ones(K), z) >= st_.mu.max() - 1e-12


def test_subgradient_symmetric_state():
    K = 4
    st_ = BeliefState(np.zeros(K), np.ones(K))
    z = sobol_standard_normals(256, K, 0).z
    # make the draw set invariant under arm permutations and sign flips
    z = np.vstack([np.roll(z, j, axis=1) for j in range(K)] + [-np.roll(z, j, axis=1) for j in range(K)])
    g = saa_subgradient(st_, np.full(K, 0.25), 3.0, np.ones(K), z)
    np.testing.assert_allclose(g, g[0], rtol=1e-12)


def test_subgradient_rejects_zero():
    st_ = BeliefState([0.0, 0.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        saa_subgradient(st_, [0.0, 1.0], 1.0, [1.0, 1.0], np.zeros((2, 2)))


@pytest.mark.parametrize("k", [1, 2, 3])
def test_kernel_matches_reference(k):
    rng = np.random.default_rng(k)
    K = 5
    st_ = rand_state(rng, K)
    s2 = rng.uniform(0.5, 2, K)
    z = sobol_standard_normals(512, K, 3).z
    rho = rng.dirichlet(np.ones(K))
    g = np.empty(K)
    v = value_grad(st_.mu, st_.sigma2, s2, rho, 7.0, z, k, g)
    assert v == pytest.approx(saa_value(st_, rho, 7.0, s2, z, k), rel=1e-12)
    np.testing.assert_allclose(g, saa_subgradient(st_, rho, 7.0, s2, z, k), rtol=1e-10, atol=1e-14)


def test_topk_finite_differences():
    rng = np.random.default_rng(11)
    K = 5
    st_ = rand_state(rng, K)
    s2 = np.ones(K)
    z = sobol_standard_normals(256, K, 0).z
    rho = rng.dirichlet(np.ones(K) * 3)
    g = saa_subgradient(st_, rho, 4.0, s2, z, k=2)
    h = 1e-6
    for a in range(K):
        e = np.zeros(K)
        e[a] = h
        fd = (saa_value(st_, rho + e, 4.0, s2, z, 2) - saa_value(st_, rho - e, 4.0, s2, z, 2)) / (2 * h)
        assert fd == pytest.approx(g[a], rel=1e-4, abs=1e-9)


def test_shannon_entropy():
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(math.log(2))
    assert shannon_entropy([1.0, 0.0]) == 0.0


# projections

@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31))
def test_project_simplex_matches_qp(K, seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(0, 1, K)
    p = project_simplex(y)
    assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-12)
    res = minimize(lambda x: 0.5 * np.sum((x - y) ** 2), np.full(K, 1 / K), jac=lambda x: x - y,
                   bounds=[(0, 1)] * K, constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1}],
                   method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    np.testing.assert_allclose(p, res.x, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31))
def test_project_halfspace_matches_qp(K, seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(0, 1, K)
    r = rng.uniform(0, 1, K)
    r_bar = rng.uniform(r.min(), r.max())
    p = project_simplex_halfspace(y, r, r_bar)
    assert np.all(p >= 0) and p.sum() == pytest.approx(1.0, abs=1e-12)
    assert r @ p <= r_bar + 1e-9
    res = minimize(lambda x: 0.5 * np.sum((x - y) ** 2), np.full(K, 1 / K), jac=lambda x: x - y,
                   bounds=[(0, 1)] * K,
                   constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1},
                                {"type": "ineq", "fun": lambda x: r_bar - r @ x}],
                   method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    assert 0.5 * np.sum((p - y) ** 2) <= 0.5 * np.sum((res.x - y) ** 2) + 1e-7


def test_project_halfspace_infeasible():
    with pytest.raises(ValueError):
        project_simplex_halfspace(np.zeros(2), np.array([1.0, 2.0]), 0.5)


# solve_rho

def test_solve_single_arm():
    assert solve_rho(BeliefState([1.0], [1.0]), 3.0, [1.0]).tolist() == [1.0]


def test_solve_symmetric_pair():
    rho = solve_rho(BeliefState([0.2, 0.2], [1.0, 1.0]), 5.0, [1.0, 1.0])
    np.testing.assert_allclose(rho, [0.5, 0.5], atol=0.01)


def test_solve_matches_grid_example():
    cfg = PlannerConfig()
    st_ = BeliefState([0.0, 1.0], [1.0, 1.0])
    z = make_draws(cfg.num_samples, 2, cfg.seed, cfg.qmc).z
    rho = solve_rho(st_, 10.0, [1.0, 1.0], cfg)
    grid = np.linspace(0, 1, 1001)
    vals = [saa_value(st_, [g, 1 - g], 10.0, [1.0, 1.0], z) for g in grid]
    assert abs(rho[0] - grid[int(np.argmax(vals))]) <= 2e-3


def test_solve_deterministic_and_positive():
    rng = np.random.default_rng(5)
    st_ = rand_state(rng, 6)
    a = solve_rho(st_, 4.0, np.ones(6))
    b = solve_rho(st_, 4.0, np.ones(6))
    np.testing.assert_array_equal(a, b)
    assert np.all(a > 0) and abs(a.sum() - 1) <= 1e-12


def test_solve_full_output_and_warning():
    st_ = BeliefState([0.0, 0.3, 0.1], [1.0, 1.0, 1.0])
    rho, info = solve_rho(st_, 4.0, np.ones(3), full_output=True)
    assert info.converged and info.value >= saa_value(
        st_, np.full(3, 1 / 3), 4.0, np.ones(3), make_draws(1024, 3, 0).z) - 1e-9
    with pytest.warns(PlannerConvergenceWarning):
        solve_rho(st_, 4.0, np.ones(3), PlannerConfig(max_iters=2))


def test_solve_rejects_bad_budget():
    with pytest.raises(ValueError):
        solve_rho(BeliefState([0.0, 1.0], [1.0, 1.0]), 0.0, [1.0, 1.0])


def test_planner_config_validation():
    with pytest.raises(ValueError):
        PlannerConfig(betas=(0.9, 1.0))
    with pytest.raises(ValueError):
        PlannerConfig(num_samples=0)


def test_warm_start():
    st_ = BeliefState([0.0, 1.0], [1.0, 1.0])
    a = solve_rho(st_, 10.0, [1.0, 1.0])
    b = solve_rho(st_, 10.0, [1.0, 1.0], PlannerConfig(init=np.log(a)))
    np.testing.assert_allclose(a, b, atol=2e-3)


# solve_extended

def test_entropy_dominates():
    st_ = BeliefState([0.0, 1.0, 2.0], [1.0, 0.5, 2.0])
    rho = solve_extended(st_, 5.0, np.ones(3), PlanningObjective(entropy_weight=1e6))
    np.testing.assert_allclose(rho, np.full(3, 1 / 3), atol=0.01)


def test_vacuous_constraint_equals_solve_rho():
    rng = np.random.default_rng(2)
    st_ = rand_state(rng, 4)
    obj = PlanningObjective(constraint=LinearConstraint(np.ones(4), 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PlannerConvergenceWarning)
        a = solve_extended(st_, 5.0, np.ones(4), obj)
    np.testing.assert_allclose(a, solve_rho(st_, 5.0, np.ones(4)), atol=0.01)


def test_binding_constraint_example():
    cfg = PlannerConfig()
    st_ = BeliefState([0.0, 0.2], [1.0, 1.0])
    r = np.array([1.0, 0.0])
    obj = PlanningObjective(constraint=LinearConstraint(r, 0.3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PlannerConvergenceWarning)
        rho = solve_extended(st_, 10.0, [1.0, 1.0], obj, cfg)
    assert r @ rho <= 0.3 + 1e-9
    z = make_draws(cfg.num_samples, 2, cfg.seed).z
    grid = np.linspace(0, 0.3, 301)
    vals = [saa_value(st_, [g, 1 - g], 10.0, [1.0, 1.0], z) for g in grid]
    assert abs(rho[0] - grid[int(np.argmax(vals))]) <= 2e-3


def test_topk_objective_spreads_mass():
    st_ = BeliefState([0.0, 0.05, 0.1, -3.0], [1.0, 1.0, 1.0, 1.0])
    rho = solve_extended(st_, 5.0, np.ones(4), PlanningObjective(k=3))
    assert np.all(rho > 0) and abs(rho.sum() - 1) <= 1e-12


def test_extended_errors():
    st_ = BeliefState([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        solve_extended(st_, 1.0, [1, 1], PlanningObjective(constraint=LinearConstraint([1.0, 2.0], 0.5)))
    with pytest.raises(ValueError):
        solve_extended(st_, 1.0, [1, 1], PlanningObjective(k=3))
    with pytest.raises(ValueError):
        PlanningObjective(k=0)


# asymptotics

def test_asymptotic_gradient_identical_arms():
    st_ = BeliefState([0.0, 0.0], [1.0, 1.0])
    g = asymptotic_gradient(st_, [0.5, 0.5], 1.0, [1.0, 1.0], M=400_000, seed=1)
    np.testing.assert_allclose(g, 2.0 / (2 * math.sqrt(math.pi)), rtol=0.01)
    g2 = asymptotic_gradient(st_, [0.25, 0.25], 1.0, [1.0, 1.0], M=400_000, seed=1)
    np.testing.assert_allclose(g2, 4 * g, rtol=1e-12)


def test_density_index_needs_two_arms():
    with pytest.raises(ValueError):
        density_index(BeliefState([0.0], [1.0]), 10)
