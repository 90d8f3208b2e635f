"""
Module: rydmirror.arrays
------------------------
Linear optics of two-dimensional sub-wavelength atomic arrays.

Lengths are in units of λ₀ (k₀ = 2π) and rates in units of Γ₀.

Submodules
----------
- `array_types`:
    Data structures and factories for geometries, modes, couplings and
    scattering results
- `coupling`:
    Dyadic Green's tensor and the coherent/dissipative coupling matrices
- `dispersion`:
    Collective spin-wave rates and shifts and plane-wave reflection
- `geometry`:
    Square arrays and Gaussian / plane-wave modes with their normalization
- `scattering`:
    Weak-drive steady states, mode projection, holes and aperture analytics
"""

from .array_types import (K0, WAVELENGTH, ArrayGeometry, CouplingMatrix,
                          Dispersion, DriveMode, ModeNorm, ScatteringResult,
                          SingleExcitationState, make_array_geometry,
                          make_coupling_matrix, make_drive_mode,
                          make_mode_norm, make_scattering_result,
                          non_jax_number, scalar_complex, scalar_float,
                          scalar_integer, scalar_numeric)
from .coupling import (coupling_matrices, effective_hamiltonian_matrix,
                       greens_tensor, projected_green)
from .dispersion import (collective_rate, collective_shift, dispersion_table,
                         finite_window_radius, lattice_sum, make_dispersion,
                         plane_wave_r_t, resonant_detuning)
from .geometry import (build_square_array, central_atom_index, drive_rabi,
                       illuminated_count, mode_amplitude, mode_amplitudes,
                       mode_norm, pairwise_distances)
from .scattering import (aperture_analytics, blockade_hole_mask,
                         finite_mirror_reflectance_model, hole_resolvent,
                         hole_transmission, hole_transmission_map,
                         masked_linear_response, potential_hole_transmission,
                         project_scattering, projection_constant,
                         reflectance_sweep, steady_state_single_excitation,
                         symmetry_representatives)

__all__: list[str] = [
    "K0",
    "WAVELENGTH",
    "ArrayGeometry",
    "CouplingMatrix",
    "Dispersion",
    "DriveMode",
    "ModeNorm",
    "ScatteringResult",
    "SingleExcitationState",
    "make_array_geometry",
    "make_coupling_matrix",
    "make_drive_mode",
    "make_mode_norm",
    "make_scattering_result",
    "non_jax_number",
    "scalar_complex",
    "scalar_float",
    "scalar_integer",
    "scalar_numeric",
    "coupling_matrices",
    "effective_hamiltonian_matrix",
    "greens_tensor",
    "projected_green",
    "collective_rate",
    "collective_shift",
    "dispersion_table",
    "finite_window_radius",
    "lattice_sum",
    "make_dispersion",
    "plane_wave_r_t",
    "resonant_detuning",
    "build_square_array",
    "central_atom_index",
    "drive_rabi",
    "illuminated_count",
    "mode_amplitude",
    "mode_amplitudes",
    "mode_norm",
    "pairwise_distances",
    "aperture_analytics",
    "blockade_hole_mask",
    "finite_mirror_reflectance_model",
    "hole_resolvent",
    "hole_transmission",
    "hole_transmission_map",
    "masked_linear_response",
    "potential_hole_transmission",
    "project_scattering",
    "projection_constant",
    "reflectance_sweep",
    "steady_state_single_excitation",
    "symmetry_representatives",
]
