import chex
import jax
import jax.numpy as jnp
import numpy as np
import pytest
from absl.testing import parameterized

from rydmirror.arrays.array_types import K0
from rydmirror.arrays.coupling import (coupling_matrices,
                                       effective_hamiltonian_matrix,
                                       greens_tensor, projected_green)
from rydmirror.arrays.geometry import build_square_array

jax.config.update("jax_enable_x64", True)


def _reference_pgp(dist: float, cos_sq: float) -> complex:
    """Scalar transcription of p·G·p for a displacement of length dist."""
    k = 2.0 * np.pi
    kr = k * dist
    pref = np.exp(1j * kr) / (4.0 * np.pi * k**2 * dist**3)
    return pref * ((kr**2 + 1j * kr - 1.0) + (-(kr**2) - 3j * kr + 3.0) * cos_sq)


class TestGreensTensor(chex.TestCase):
    @chex.variants(with_jit=True, without_jit=True)
    @parameterized.parameters(
        {"r": (0.5, 0.0, 0.0)},
        {"r": (0.3, -0.4, 0.0)},
        {"r": (0.1, 0.2, 0.7)},
    )
    def test_even_and_symmetric(self, r):
        """G(−r) = G(r) and G is a symmetric tensor."""
        var_greens = self.variant(greens_tensor)
        r = jnp.asarray(r)
        g_plus = var_greens(r)
        g_minus = var_greens(-r)
        chex.assert_shape(g_plus, (3, 3))
        chex.assert_trees_all_close(g_plus, g_minus, atol=1e-14)
        chex.assert_trees_all_close(g_plus, g_plus.T, atol=1e-14)

    def test_zero_displacement_rejected(self):
        with pytest.raises(ValueError):
            greens_tensor(jnp.zeros(3))

    def test_transverse_far_field(self):
        """For r ⊥ p and k₀r ≫ 1, p·G·p → e^{ik₀r}/(4πr)."""
        r = jnp.array([0.0, 200.0, 0.0])
        g = greens_tensor(r)
        far = jnp.exp(1j * K0 * 200.0) / (4.0 * jnp.pi * 200.0)
        chex.assert_trees_all_close(g[0, 0], far, rtol=2e-3)

    def test_projection_matches_tensor(self):
        axis = jnp.array([1.0, 0.0, 0.0])
        r = jnp.array([0.31, 0.47, 0.0])
        full = axis @ greens_tensor(r) @ axis
        chex.assert_trees_all_close(projected_green(r, axis), full, rtol=1e-12)

    def test_coincident_limit_gives_unit_decay(self):
        """(6π/k₀) Im p·G·p → 1 as r → 0."""
        axis = jnp.array([1.0, 0.0, 0.0])
        r = jnp.array([1e-3, 0.0, 0.0])
        gamma = 6.0 * jnp.pi / K0 * jnp.imag(projected_green(r, axis))
        chex.assert_trees_all_close(gamma, 1.0, rtol=1e-3)


class TestCouplingMatrices(chex.TestCase):
    def test_single_atom(self):
        coupling = coupling_matrices(build_square_array(1, 0.5))
        chex.assert_trees_all_close(coupling.Gamma, jnp.ones((1, 1)))
        chex.assert_trees_all_close(coupling.J, jnp.zeros((1, 1)))

    @parameterized.parameters({"n": 2}, {"n": 4}, {"n": 6})
    def test_symmetry_and_positivity(self, n: int):
        """Γ is symmetric PSD with unit diagonal, J symmetric, H complex-symmetric."""
        coupling = coupling_matrices(build_square_array(n, 0.5))
        chex.assert_trees_all_close(coupling.Gamma, coupling.Gamma.T, atol=1e-14)
        chex.assert_trees_all_close(coupling.J, coupling.J.T, atol=1e-14)
        chex.assert_trees_all_close(coupling.H, coupling.H.T, atol=1e-14)
        chex.assert_trees_all_close(jnp.diag(coupling.Gamma), jnp.ones(n * n))
        self.assertGreaterEqual(float(jnp.min(jnp.linalg.eigvalsh(coupling.Gamma))), -1e-10)

    def test_nearest_neighbour_along_dipole(self):
        """Couplings of a pair along the dipole axis against a scalar formula."""
        coupling = coupling_matrices(build_square_array(2, 0.5, "x"))
        pgp = _reference_pgp(0.5, 1.0)
        # atoms 0 and 2 are separated along x
        chex.assert_trees_all_close(
            coupling.J[0, 2], -3.0 * np.pi / K0 * pgp.real, rtol=1e-12
        )
        chex.assert_trees_all_close(
            coupling.Gamma[0, 2], 6.0 * np.pi / K0 * pgp.imag, rtol=1e-12
        )
        pgp_perp = _reference_pgp(0.5, 0.0)
        chex.assert_trees_all_close(
            coupling.Gamma[0, 1], 6.0 * np.pi / K0 * pgp_perp.imag, rtol=1e-12
        )

    @parameterized.parameters({"n": 3}, {"n": 5})
    def test_effective_hamiltonian_decays(self, n: int):
        """Eigenvalues of J − iΓ/2 lie in the lower half plane above −N_a/2."""
        coupling = coupling_matrices(build_square_array(n, 0.5))
        eig = jnp.linalg.eigvals(effective_hamiltonian_matrix(coupling, 0.0))
        self.assertLessEqual(float(jnp.max(jnp.imag(eig))), 1e-12)
        self.assertGreaterEqual(float(jnp.min(jnp.imag(eig))), -n * n / 2.0 - 1e-9)

    def test_shifts_enter_as_detuning(self):
        coupling = coupling_matrices(build_square_array(2, 0.5))
        shifts = jnp.array([0.0, 1.0, 2.0, 3.0])
        h = effective_hamiltonian_matrix(coupling, 0.5, shifts)
        chex.assert_trees_all_close(jnp.diag(h), -(0.5 - shifts) - 0.5j)


if __name__ == "__main__":
    pytest.main([__file__])
