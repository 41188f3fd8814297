from .asymptotics import asymptotic_gradient, density_index
from .draws import NormalDraws, make_draws, pseudo_standard_normals, sobol_standard_normals
from .objective import saa_subgradient, saa_value, shannon_entropy
from .optim import project_simplex, project_simplex_halfspace
from .solve import (
    LinearConstraint,
    PlannerConfig,
    PlannerConvergenceWarning,
    PlanningObjective,
    solve_extended,
    solve_rho,
)

__all__ = [
    "LinearConstraint",
    "NormalDraws",
    "PlannerConfig",
    "PlannerConvergenceWarning",
    "PlanningObjective",
    "asymptotic_gradient",
    "density_index",
    "make_draws",
    "project_simplex",
    "project_simplex_halfspace",
    "pseudo_standard_normals",
    "saa_subgradient",
    "saa_value",
    "shannon_entropy",
    "sobol_standard_normals",
    "solve_extended",
    "solve_rho",
]
