import chex
import jax
import jax.numpy as jnp
import pytest
from absl.testing import parameterized

from rydmirror.arrays.array_types import make_drive_mode
from rydmirror.arrays.geometry import (build_square_array, central_atom_index,
                                       drive_rabi, illuminated_count,
                                       mode_amplitude, mode_amplitudes,
                                       mode_norm, pairwise_distances)

jax.config.update("jax_enable_x64", True)


class TestBuildSquareArray(chex.TestCase):
    def test_single_atom_at_origin(self):
        geometry = build_square_array(1, 0.5, "x")
        chex.assert_shape(geometry.positions, (1, 2))
        chex.assert_trees_all_close(geometry.positions, jnp.zeros((1, 2)))

    def test_two_by_two_row_major(self):
        """Four atoms at (±d/2, ±d/2) in row-major order."""
        geometry = build_square_array(2, 0.5, "x")
        expected = jnp.array(
            [[-0.25, -0.25], [-0.25, 0.25], [0.25, -0.25], [0.25, 0.25]]
        )
        chex.assert_trees_all_close(geometry.positions, expected)

    @parameterized.parameters({"n": 3}, {"n": 8}, {"n": 41})
    def test_centroid_and_count(self, n: int):
        geometry = build_square_array(n, 0.5, "x")
        chex.assert_shape(geometry.positions, (n * n, 2))
        chex.assert_trees_all_close(
            jnp.mean(geometry.positions, axis=0), jnp.zeros(2), atol=1e-12
        )

    def test_inversion_symmetry_and_determinism(self):
        geometry = build_square_array(6, 0.5)
        again = build_square_array(6, 0.5)
        chex.assert_trees_all_equal(geometry.positions, again.positions)
        chex.assert_trees_all_close(
            -geometry.positions[::-1], geometry.positions, atol=1e-15
        )

    @parameterized.parameters({"n": 0, "d": 0.5}, {"n": 2, "d": 0.0})
    def test_rejects_non_positive(self, n: int, d: float):
        with pytest.raises(ValueError):
            build_square_array(n, d)


class TestDistances(chex.TestCase):
    def test_pairwise_distances(self):
        geometry = build_square_array(2, 0.5)
        dist = pairwise_distances(geometry)
        chex.assert_shape(dist, (4, 4))
        chex.assert_trees_all_close(jnp.diag(dist), jnp.zeros(4))
        chex.assert_trees_all_close(dist[0, 1], 0.5)
        chex.assert_trees_all_close(dist[0, 3], 0.5 * jnp.sqrt(2.0))

    @parameterized.parameters({"n": 5, "expected": 12}, {"n": 4, "expected": 5})
    def test_central_atom(self, n: int, expected: int):
        self.assertEqual(central_atom_index(build_square_array(n, 0.5)), expected)


class TestModes(chex.TestCase):
    def test_gaussian_peak_and_one_waist(self):
        mode = make_drive_mode("gaussian", waist=1.0)
        chex.assert_trees_all_close(mode_amplitude(mode, jnp.zeros(2)), 1.0 + 0.0j)
        chex.assert_trees_all_close(
            mode_amplitude(mode, jnp.array([1.0, 0.0])), jnp.exp(-1.0) + 0.0j
        )

    def test_plane_wave_normal_incidence_is_uniform(self):
        mode = make_drive_mode("plane-wave")
        amps = mode_amplitudes(mode, build_square_array(5, 0.5))
        chex.assert_trees_all_close(amps, jnp.ones(25, dtype=complex))

    def test_gaussian_radially_decreasing(self):
        mode = make_drive_mode("gaussian", waist=0.8)
        radii = jnp.linspace(0.0, 3.0, 20)
        values = jnp.array(
            [jnp.real(mode_amplitude(mode, jnp.array([r, 0.0]))) for r in radii]
        )
        self.assertTrue(bool(jnp.all(jnp.diff(values) < 0.0)))
        self.assertTrue(bool(jnp.all(values > 0.0)))

    @parameterized.parameters(
        {"waist": 1.0, "area": jnp.pi / 2.0},
        {"waist": 2.0, "area": 2.0 * jnp.pi},
    )
    def test_mode_norm(self, waist: float, area: float):
        chex.assert_trees_all_close(
            mode_norm(make_drive_mode("gaussian", waist=waist)).area, area
        )

    def test_mode_norm_quadratic_scaling(self):
        a1 = mode_norm(make_drive_mode(waist=1.3)).area
        a2 = mode_norm(make_drive_mode(waist=2.6)).area
        chex.assert_trees_all_close(a2, 4.0 * a1)

    def test_plane_wave_norm_flagged(self):
        with pytest.raises(ValueError):
            mode_norm(make_drive_mode("plane-wave"))

    def test_drive_rabi_scales_with_peak(self):
        geometry = build_square_array(3, 0.5)
        mode = make_drive_mode(waist=1.0, peak_rabi=0.2)
        rabi = drive_rabi(geometry, mode)
        chex.assert_trees_all_close(rabi[4], 0.2 + 0.0j)
        chex.assert_trees_all_close(rabi[5], 0.2 * jnp.exp(-0.25) + 0.0j)


class TestIlluminatedCount(chex.TestCase):
    @parameterized.parameters(
        {"w0": 0.5, "d": 0.5, "expected": jnp.pi},
        {"w0": 0.35 * 16 * 0.5, "d": 0.5, "expected": jnp.pi * 5.6**2},
        {"w0": 0.0, "d": 0.5, "expected": 0.0},
    )
    def test_values(self, w0: float, d: float, expected: float):
        chex.assert_trees_all_close(illuminated_count(w0, d), expected)


if __name__ == "__main__":
    pytest.main([__file__])
