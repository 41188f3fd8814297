"""Batched best-arm identification: Gaussian beliefs, residual-horizon planning,
baseline policies, finite-batch simulation and a benchmark harness."""
from .belief import (
    BeliefState,
    MeasurementModel,
    as_allocation,
    posterior_update,
    sample_limit_observation,
    sample_transition,
    select_arm,
    terminal_std,
    variance_decrement,
)
from .planner import PlannerConfig, PlanningObjective, LinearConstraint, solve_extended, solve_rho
from .policies import PolicySpec
from .sim import EnvironmentSpec, run_experiment, run_limit_experiment

__version__ = "0.1.0"
