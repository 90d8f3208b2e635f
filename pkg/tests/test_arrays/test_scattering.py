import chex
import jax
import jax.numpy as jnp
import pytest
from absl.testing import parameterized
from jax.scipy.special import erf

from rydmirror.arrays.array_types import make_drive_mode
from rydmirror.arrays.coupling import coupling_matrices
from rydmirror.arrays.dispersion import resonant_detuning
from rydmirror.arrays.geometry import build_square_array, central_atom_index
from rydmirror.arrays.scattering import (aperture_analytics,
                                         blockade_hole_mask,
                                         finite_mirror_reflectance_model,
                                         hole_resolvent, hole_transmission,
                                         hole_transmission_map,
                                         masked_linear_response,
                                         potential_hole_transmission,
                                         project_scattering,
                                         reflectance_sweep,
                                         steady_state_single_excitation)

jax.config.update("jax_enable_x64", True)


def _intact_result(n: int, waist: float, peak_rabi: float = 1.0):
    geometry = build_square_array(n, 0.5)
    delta = float(resonant_detuning(geometry))
    drive = make_drive_mode("gaussian", waist, peak_rabi, delta)
    state = steady_state_single_excitation(geometry, drive)
    return geometry, state, project_scattering(state, drive, geometry)


class TestSingleExcitation(chex.TestCase):
    def test_single_atom_amplitude(self):
        """One atom on resonance: c = Ω/(−i/2) = 2iΩ₀."""
        geometry = build_square_array(1, 0.5)
        state = steady_state_single_excitation(
            geometry, make_drive_mode("gaussian", 5.0, 1.0, 0.0)
        )
        chex.assert_trees_all_close(state.c_e, jnp.array([2.0j]), atol=1e-12)

    def test_single_atom_reflectance(self):
        """R = (3/(4πA))² for a single resonant atom."""
        geometry = build_square_array(1, 0.5)
        drive = make_drive_mode("gaussian", 5.0, 1.0, 0.0)
        state = steady_state_single_excitation(geometry, drive)
        result = project_scattering(state, drive, geometry)
        area = jnp.pi * 25.0 / 2.0
        chex.assert_trees_all_close(result.R, (3.0 / (4.0 * jnp.pi * area)) ** 2, rtol=1e-10)

    def test_all_atoms_removed(self):
        geometry = build_square_array(3, 0.5)
        drive = make_drive_mode("gaussian", 1.0, 1.0, 0.0)
        state = steady_state_single_excitation(
            geometry, drive, jnp.zeros(9, dtype=bool)
        )
        chex.assert_trees_all_close(state.c_e, jnp.zeros(9, dtype=jnp.complex128))
        result = project_scattering(state, drive, geometry)
        chex.assert_trees_all_close(result.R, 0.0)
        chex.assert_trees_all_close(result.T, 1.0)

    def test_masked_atoms_stay_dark(self):
        geometry = build_square_array(3, 0.5)
        coupling = coupling_matrices(geometry)
        h_eff = coupling.H - (0.2 + 0.5j) * jnp.eye(9)
        mask = jnp.arange(9) % 2 == 0
        c, residual = masked_linear_response(h_eff, jnp.ones(9, dtype=jnp.complex128), mask)
        chex.assert_trees_all_close(c[~mask], jnp.zeros(4, dtype=jnp.complex128))
        self.assertLess(float(residual), 1e-10)

    def test_amplitudes_linear_in_drive(self):
        _, state_a, result_a = _intact_result(5, 1.0, 1.0)
        _, state_b, result_b = _intact_result(5, 1.0, 0.3)
        chex.assert_trees_all_close(state_b.c_e, 0.3 * state_a.c_e, rtol=1e-10)
        chex.assert_trees_all_close(result_b.r_amp, result_a.r_amp, rtol=1e-10)

    def test_zero_drive_is_continuous(self):
        _, state_zero, result_zero = _intact_result(3, 0.6, 0.0)
        _, _, result_weak = _intact_result(3, 0.6, 1e-4)
        assert float(state_zero.drive.peak_rabi) == 1.0
        assert float(result_zero.R) > 0.1
        chex.assert_trees_all_close(result_zero.r_amp, result_weak.r_amp, rtol=1e-10)

    @parameterized.parameters({"waist": 1.5}, {"waist": 2.5})
    def test_loss_nonnegative(self, waist: float):
        _, state, result = _intact_result(11, waist)
        self.assertGreaterEqual(float(result.K), -1e-9)
        self.assertLess(float(state.residual), 1e-10)
        chex.assert_trees_all_close(result.R + result.T + result.K, 1.0)

    def test_reflectance_sweep_matches_direct_solves(self):
        geometry = build_square_array(7, 0.5)
        delta = float(resonant_detuning(geometry))
        waists = [1.0, 1.5]
        rows = reflectance_sweep(geometry, waists, delta)
        chex.assert_shape(rows, (2, 4))
        for k, w in enumerate(waists):
            drive = make_drive_mode("gaussian", w, 1.0, delta)
            state = steady_state_single_excitation(geometry, drive)
            result = project_scattering(state, drive, geometry)
            chex.assert_trees_all_close(rows[k, 0], result.R, rtol=1e-9)
            chex.assert_trees_all_close(rows[k, 1], result.T, rtol=1e-9)


class TestHoles(chex.TestCase):
    def test_hole_mask_radius(self):
        geometry = build_square_array(5, 0.5)
        center = central_atom_index(geometry)
        self.assertEqual(int(jnp.sum(~blockade_hole_mask(geometry, center, 0.0))), 1)
        self.assertEqual(int(jnp.sum(~blockade_hole_mask(geometry, center, 0.5))), 5)
        self.assertEqual(int(jnp.sum(~blockade_hole_mask(geometry, center, 0.75))), 9)

    @parameterized.parameters({"use_symmetry": True}, {"use_symmetry": False})
    def test_map_matches_direct_solves(self, use_symmetry: bool):
        """The resolvent update reproduces masked solves for every center."""
        geometry = build_square_array(7, 0.5)
        delta = float(resonant_detuning(geometry))
        coupling = coupling_matrices(geometry)
        centers = list(range(geometry.n_atoms))
        t_map, residual = hole_transmission_map(
            geometry, centers, 0.6, 1.0, delta, use_symmetry=use_symmetry
        )
        chex.assert_shape(t_map, (49,))
        self.assertLess(float(jnp.max(residual)), 1e-8)
        for i in (0, 3, 10, 24, 48):
            t_direct, _ = hole_transmission(geometry, i, 0.6, 1.0, delta, coupling)
            chex.assert_trees_all_close(t_map[i], t_direct, atol=1e-9)

    def test_precomputed_resolvent(self):
        geometry = build_square_array(5, 0.5)
        delta = float(resonant_detuning(geometry))
        resolvent = hole_resolvent(geometry, delta)
        t_a, _ = hole_transmission_map(geometry, [0, 12], 0.5, 1.0, delta)
        t_b, _ = hole_transmission_map(geometry, [0, 12], 0.5, 1.0, delta, resolvent)
        chex.assert_trees_all_close(t_a, t_b)

    def test_empty_center_list(self):
        geometry = build_square_array(3, 0.5)
        t, residual = hole_transmission_map(geometry, [], 0.5, 1.0, 0.0)
        chex.assert_shape(t, (0,))
        chex.assert_shape(residual, (0,))

    def test_central_hole_transmits_more_than_corner_hole(self):
        geometry = build_square_array(15, 0.5)
        center = central_atom_index(geometry)
        t, _ = hole_transmission_map(geometry, [center, 0], 1.0, 1.5)
        self.assertGreater(float(jnp.abs(t[0]) ** 2), float(jnp.abs(t[1]) ** 2))

    def test_zero_potential_equals_single_removal(self):
        geometry = build_square_array(5, 0.5)
        delta = float(resonant_detuning(geometry))
        t_pot, _ = potential_hole_transmission(
            geometry, 12, lambda dist: jnp.zeros_like(dist), 1.0, delta
        )
        t_hole, _ = hole_transmission(geometry, 12, 0.0, 1.0, delta)
        chex.assert_trees_all_close(t_pot, t_hole, atol=1e-12)

    def test_strong_potential_approaches_step_hole(self):
        """A shift ≫ Γ₀ inside R_b and zero outside acts like removing the atoms."""
        geometry = build_square_array(7, 0.5)
        delta = float(resonant_detuning(geometry))
        t_pot, _ = potential_hole_transmission(
            geometry, 24, lambda dist: jnp.where(dist <= 0.6, 1e7, 0.0), 1.0, delta
        )
        t_hole, _ = hole_transmission(geometry, 24, 0.6, 1.0, delta)
        chex.assert_trees_all_close(t_pot, t_hole, atol=1e-5)

    @pytest.mark.slow
    def test_large_mirror_reflects(self):
        _, _, result = _intact_result(41, 2.5)
        self.assertGreaterEqual(float(result.R), 0.98)

    @pytest.mark.slow
    @parameterized.parameters({"R_b": 1.0}, {"R_b": 2.5}, {"R_b": 5.0})
    def test_aperture_law(self, R_b: float):
        geometry = build_square_array(41, 0.5)
        t, _ = hole_transmission_map(geometry, [central_atom_index(geometry)], R_b, 2.5)
        T_bar, _, _ = aperture_analytics(R_b, 2.5)
        chex.assert_trees_all_close(jnp.abs(t[0]) ** 2, T_bar, atol=0.05)


class TestAnalytics(chex.TestCase):
    @chex.variants(with_jit=True, without_jit=True)
    def test_aperture_values(self):
        var_aperture = self.variant(aperture_analytics)
        T_bar, R, K = var_aperture(1.0, 2.0)
        nu = jnp.exp(-0.5)
        chex.assert_trees_all_close(T_bar, (1.0 - nu) ** 2)
        chex.assert_trees_all_close(R, nu**2)
        chex.assert_trees_all_close(T_bar + R + K, 1.0)

    def test_no_aperture(self):
        T_bar, R, K = aperture_analytics(0.0, 2.0)
        chex.assert_trees_all_close((T_bar, R, K), (0.0, 1.0, 0.0), atol=1e-15)

    def test_clipping_term(self):
        """At w = Nd/√2 the edge term alone is erf⁴(1)."""
        n, d = 10, 0.5
        w = n * d / jnp.sqrt(2.0)
        value = finite_mirror_reflectance_model(n, d, w, 0.0)
        chex.assert_trees_all_close(value, erf(1.0) ** 4)
        chex.assert_trees_all_close(value, 0.5044, atol=1e-3)

    def test_diffraction_term(self):
        value = finite_mirror_reflectance_model(1000, 0.5, 2.0, 0.16)
        chex.assert_trees_all_close(value, 1.0 - 0.01, atol=1e-10)


if __name__ == "__main__":
    pytest.main([__file__])
