"""Numerical laboratory for soliton stability of the quartic Klein-Gordon
equation u_tt - u_xx + u = u^4 in one space dimension.

Modules: soliton (profile and spectral data of the linearized operator),
scattering (Jost solutions and transmission/reflection coefficients), dft
(distorted Fourier transform, multiplier calculus, linear propagator),
dynamics (nonlinear even-perturbation evolution), manifold (stable-manifold
shooting), analysis (decay-rate estimation and reporting), cli (pipeline).
"""

__version__ = "0.1.0"

from .grids import GridSpec
from .soliton import SolitonModel, build_soliton, spectrum_report
from .scattering import (ScatteringData, build_scattering, jost_solve,
                         scattering_coefficients, genericity_classify)
from .dft import (DistortedBasis, Profile, build_basis, forward_dft,
                  inverse_dft, project_continuous, apply_multiplier,
                  linear_propagate, profile_from_state, state_from_profile,
                  linear_decay_probe)
from .dynamics import (DiscreteSoliton, FieldState, ModalState, Trajectory,
                       build_discrete_soliton, evolve_full, evolve_modal,
                       hamiltonian, mode_extract, mode_embed)
from .manifold import (DataSpec, ShootResult, prepare_data, classify_escape,
                       shoot_stable, stability_residual, budget_norm,
                       normalize_budget)
from .analysis import (DecayReport, FitResult, fit_decay, x_norm,
                       profile_derivative_decay, integrated_decay,
                       decay_report)
from .config import Config, ConfigError, load_config

__all__ = [
    "GridSpec", "SolitonModel", "build_soliton", "spectrum_report",
    "ScatteringData", "build_scattering", "jost_solve",
    "scattering_coefficients", "genericity_classify",
    "DistortedBasis", "Profile", "build_basis", "forward_dft", "inverse_dft",
    "project_continuous", "apply_multiplier", "linear_propagate",
    "profile_from_state", "state_from_profile", "linear_decay_probe",
    "DiscreteSoliton", "FieldState", "ModalState", "Trajectory",
    "build_discrete_soliton", "evolve_full", "evolve_modal", "hamiltonian",
    "mode_extract", "mode_embed",
    "DataSpec", "ShootResult", "prepare_data", "classify_escape",
    "shoot_stable", "stability_residual", "budget_norm", "normalize_budget",
    "DecayReport", "FitResult", "fit_decay", "x_norm",
    "profile_derivative_decay", "integrated_decay", "decay_report",
    "Config", "ConfigError", "load_config",
]
