"""
Module: rydmirror.rydberg
-------------------------
Rydberg blockade on atomic mirrors: photon correlations, the single-photon
switch, the strongly driven mirror and its stochastic model.

Submodules
----------
- `rydberg_types`:
    Data structures and factories for dressing schemes, blockade masks,
    pair states, density matrices and Monte Carlo results
- `dressing`:
    Dressed pair potentials, step-model radii and physical parameters
- `correlations`:
    Two-excitation steady state and g⁽²⁾(0) of the reflected light
- `switch`:
    Stored-excitation photon switch and its optimization
- `master_equation`:
    Blockade-projected master equation under strong driving
- `stochastic`:
    Semi-classical hole-punching model and binomial loss
"""

from .correlations import (DEFAULT_MAX_PAIRS, allowed_pairs, g2_at_radius,
                           g2_reflected, g2_saturation_baseline, g2_sweep,
                           pair_amplitude_matrix,
                           steady_state_two_excitation)
from .dressing import (RB87_GAMMA0, RB87_WAVELENGTH, blockade_from_scheme,
                       blockade_mask, blockade_radius, c6_coefficient,
                       control_power, dressing_curve, kappa_for,
                       pair_potential, physical_parameter_table,
                       physical_parameters, rydberg_dipole, shift_profile,
                       stark_shift, step_radius)
from .master_equation import (DEFAULT_MAX_STATES, STRONG_DRIVE_COLUMNS,
                              build_liouvillian, enumerate_blockade_basis,
                              liouvillian_apply, single_atom_excitation,
                              steady_state_density_matrix,
                              strong_drive_observables, strong_drive_sweep)
from .rydberg_types import (BLOCKADE_KINDS, DRESSING_KINDS,
                            BinomialLossModel, BlockadeBasis, BlockadeMask,
                            DensityMatrixState, DressingScheme,
                            MirrorConfiguration, MonteCarloEstimate,
                            ProjectedLiouvillian, StoredSpinWave,
                            SwitchReport, TwoExcitationState,
                            make_binomial_loss_model, make_blockade_mask,
                            make_dressing_scheme, make_stored_spinwave)
from .stochastic import (STOCHASTIC_COLUMNS, analytic_binomial_loss,
                         binomial_loss_mc, configuration_optics, k_max,
                         k_max_collapse, mc_estimate, mc_sweep, omega_max,
                         region_counts, region_matrix, sample_configuration,
                         sample_configurations, saturation_parameter,
                         uniform_drive_model)
from .switch import (BEYOND_STEP_COLUMNS, SWITCH_COLUMNS, SWITCH_MODES,
                     HoleProfile, beyond_step_error, beyond_step_sweep,
                     conditional_transmittance,
                     hole_amplitude_profile, intact_reflectance,
                     optimal_waist_analytic, optimize_switch,
                     potential_conditional_transmittance,
                     retrieval_overlap_error, storage_efficiency,
                     stored_spinwave, switch_error_scaling, switch_errors,
                     switch_sweep, toy_model_T, with_beyond_step)

__all__: list[str] = [
    "DEFAULT_MAX_PAIRS",
    "allowed_pairs",
    "g2_at_radius",
    "g2_reflected",
    "g2_saturation_baseline",
    "g2_sweep",
    "pair_amplitude_matrix",
    "steady_state_two_excitation",
    "RB87_GAMMA0",
    "RB87_WAVELENGTH",
    "blockade_from_scheme",
    "blockade_mask",
    "blockade_radius",
    "c6_coefficient",
    "control_power",
    "dressing_curve",
    "kappa_for",
    "pair_potential",
    "physical_parameter_table",
    "physical_parameters",
    "rydberg_dipole",
    "shift_profile",
    "stark_shift",
    "step_radius",
    "DEFAULT_MAX_STATES",
    "STRONG_DRIVE_COLUMNS",
    "build_liouvillian",
    "enumerate_blockade_basis",
    "liouvillian_apply",
    "single_atom_excitation",
    "steady_state_density_matrix",
    "strong_drive_observables",
    "strong_drive_sweep",
    "BLOCKADE_KINDS",
    "DRESSING_KINDS",
    "BinomialLossModel",
    "BlockadeBasis",
    "BlockadeMask",
    "DensityMatrixState",
    "DressingScheme",
    "MirrorConfiguration",
    "MonteCarloEstimate",
    "ProjectedLiouvillian",
    "StoredSpinWave",
    "SwitchReport",
    "TwoExcitationState",
    "make_binomial_loss_model",
    "make_blockade_mask",
    "make_dressing_scheme",
    "make_stored_spinwave",
    "STOCHASTIC_COLUMNS",
    "analytic_binomial_loss",
    "binomial_loss_mc",
    "configuration_optics",
    "k_max",
    "k_max_collapse",
    "mc_estimate",
    "mc_sweep",
    "omega_max",
    "region_counts",
    "region_matrix",
    "sample_configuration",
    "sample_configurations",
    "saturation_parameter",
    "uniform_drive_model",
    "BEYOND_STEP_COLUMNS",
    "SWITCH_COLUMNS",
    "SWITCH_MODES",
    "HoleProfile",
    "beyond_step_error",
    "beyond_step_sweep",
    "conditional_transmittance",
    "hole_amplitude_profile",
    "intact_reflectance",
    "optimal_waist_analytic",
    "optimize_switch",
    "potential_conditional_transmittance",
    "retrieval_overlap_error",
    "storage_efficiency",
    "stored_spinwave",
    "switch_error_scaling",
    "switch_errors",
    "switch_sweep",
    "toy_model_T",
    "with_beyond_step",
]
