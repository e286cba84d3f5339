"""Ground-state, reference-problem and Rayleigh-quotient solvers."""

from .action import gaussian_init, projected_gaussian_init, solve_action_gss
from .energy import solve_energy_gss
from .radial import RadialState, solve_radial_energy, solve_radial_global
from .rayleigh import quadratic_form_infimum, square_well_ground_energy
from .reference import estimate_mu_star, roundtrip_energy_action, roundtrip_threshold
from .report import SolveReport

__all__ = [
    "RadialState", "SolveReport", "estimate_mu_star", "gaussian_init", "projected_gaussian_init",
    "quadratic_form_infimum", "roundtrip_energy_action", "roundtrip_threshold", "solve_action_gss",
    "solve_energy_gss", "solve_radial_energy", "solve_radial_global", "square_well_ground_energy",
]
