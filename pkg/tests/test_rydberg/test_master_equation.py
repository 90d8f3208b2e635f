import chex
import jax
import jax.numpy as jnp
import numpy as np
import pytest
from absl.testing import parameterized

from rydmirror.arrays.array_types import make_drive_mode
from rydmirror.arrays.coupling import coupling_matrices
from rydmirror.arrays.dispersion import resonant_detuning
from rydmirror.arrays.geometry import (build_square_array, drive_rabi,
                                       pairwise_distances)
from rydmirror.arrays.scattering import (project_scattering,
                                         steady_state_single_excitation)
from rydmirror.errors import BasisSizeError
from rydmirror.rydberg.master_equation import (enumerate_blockade_basis,
                                               single_atom_excitation,
                                               steady_state_density_matrix,
                                               strong_drive_observables,
                                               strong_drive_sweep)

jax.config.update("jax_enable_x64", True)


def _site_operator(op, j, n):
    """Operator acting on atom j, with atom j stored in bit j of the state index."""
    out = np.ones((1, 1), dtype=np.complex128)
    for k in reversed(range(n)):
        out = np.kron(out, op if k == j else np.eye(2))
    return out


def _lindblad_steady_state(h, gamma, rabi, delta, allowed_bits):
    """Steady state of the full master equation restricted to the allowed configurations."""
    n = rabi.shape[0]
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
    sm = [_site_operator(lower, j, n) for j in range(n)]
    sp = [s.conj().T for s in sm]
    dim = 2**n
    H = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(n):
        H += -(delta + 0.5j) * sp[j] @ sm[j] - rabi[j] * sp[j] - np.conj(rabi[j]) * sm[j]
        for k in range(n):
            if j != k:
                H += h[j, k] * sp[j] @ sm[k]
    keep = np.asarray(allowed_bits)
    H = H[np.ix_(keep, keep)]
    sm = [s[np.ix_(keep, keep)] for s in sm]
    sp = [s[np.ix_(keep, keep)] for s in sp]
    m = keep.size
    eye = np.eye(m)
    # row-major vec: vec(A X B) = kron(A, B.T) vec(X)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.conj()))
    for i in range(n):
        for j in range(n):
            L += gamma[i, j] * np.kron(sm[j], sp[i].T)
    A = np.vstack([L, eye.reshape(1, -1)])
    b = np.zeros(m * m + 1, dtype=np.complex128)
    b[-1] = 1.0
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return x.reshape(m, m)


def _basis_bits(basis):
    occ = np.asarray(basis.occupation)
    return (occ * (1 << np.arange(occ.shape[1]))).sum(axis=1)


class TestBasis(chex.TestCase):
    @parameterized.named_parameters(
        ("nearest_blocked", 0.3, 7),
        ("all_blocked", 0.5, 5),
        ("free", 0.0, 16),
    )
    def test_counts(self, R_b, expected):
        basis = enumerate_blockade_basis(build_square_array(2, 0.3), R_b)
        assert basis.n_states == expected

    def test_independent_sets(self):
        geometry = build_square_array(3, 0.5)
        basis = enumerate_blockade_basis(geometry, 0.5)
        dist = np.asarray(pairwise_distances(geometry))
        occ = np.asarray(basis.occupation)
        close = (dist <= 0.5 + 1e-9) & ~np.eye(9, dtype=bool)
        for row in occ:
            assert not np.any(close[np.ix_(row, row)])
        assert int(basis.n_excitations[0]) == 0
        assert bool(jnp.all(jnp.diff(basis.n_excitations) >= 0))

    def test_cap(self):
        with pytest.raises(BasisSizeError):
            enumerate_blockade_basis(build_square_array(2, 0.3), 0.0, max_states=4)


class TestSteadyState(chex.TestCase):
    @parameterized.parameters((0.3, 0.0), (1.0, 0.4), (2.5, -1.0))
    def test_single_atom(self, omega, delta):
        geometry = build_square_array(1, 0.5)
        drive = make_drive_mode("gaussian", 10.0, omega, delta)
        basis = enumerate_blockade_basis(geometry, 0.0)
        state = steady_state_density_matrix(geometry, drive, basis)
        chex.assert_trees_all_close(
            jnp.real(state.rho[1, 1]), single_atom_excitation(omega, delta), rtol=1e-9
        )

    @parameterized.named_parameters(
        ("free", 0.0),
        ("nearest_blocked", 0.3),
    )
    def test_matches_full_lindblad(self, R_b):
        geometry = build_square_array(2, 0.3)
        coupling = coupling_matrices(geometry)
        drive = make_drive_mode("gaussian", 0.4, 1.2, 0.2)
        basis = enumerate_blockade_basis(geometry, R_b)
        state = steady_state_density_matrix(geometry, drive, basis, coupling)
        bits = _basis_bits(basis)
        oracle = _lindblad_steady_state(
            np.asarray(coupling.H),
            np.asarray(coupling.Gamma),
            np.asarray(drive_rabi(geometry, drive)),
            0.2,
            np.sort(bits),
        )
        order = np.searchsorted(np.sort(bits), bits)
        expected = oracle[np.ix_(order, order)]
        chex.assert_trees_all_close(state.rho, jnp.asarray(expected), atol=1e-9)

    def test_iterative_matches_dense(self):
        geometry = build_square_array(2, 0.3)
        drive = make_drive_mode("gaussian", 0.4, 0.8, 0.0)
        basis = enumerate_blockade_basis(geometry, 0.0)
        dense = steady_state_density_matrix(geometry, drive, basis)
        iterative = steady_state_density_matrix(geometry, drive, basis, direct_dim=0)
        chex.assert_trees_all_close(iterative.rho, dense.rho, atol=1e-6)

    def test_state_invariants(self):
        geometry = build_square_array(3, 0.5)
        drive = make_drive_mode("gaussian", 0.6, 2.0, float(resonant_detuning(geometry)))
        basis = enumerate_blockade_basis(geometry, 0.5)
        state = steady_state_density_matrix(geometry, drive, basis)
        chex.assert_trees_all_close(state.trace, 1.0, atol=1e-12)
        assert float(state.hermiticity) < 1e-10
        assert float(state.min_eigenvalue) > -1e-8
        chex.assert_trees_all_close(state.rho, jnp.conj(state.rho.T), atol=1e-12)


class TestObservables(chex.TestCase):
    def test_weak_drive_limit(self):
        """At vanishing drive the blockaded mirror scatters like the linear one."""
        geometry = build_square_array(3, 0.5)
        delta = float(resonant_detuning(geometry))
        drive = make_drive_mode("gaussian", 0.6, 1e-3, delta)
        basis = enumerate_blockade_basis(geometry, 1.5)
        assert basis.n_states == 10
        state = steady_state_density_matrix(geometry, drive, basis)
        R, T, K = strong_drive_observables(state, geometry, drive, drive)
        linear = project_scattering(
            steady_state_single_excitation(geometry, drive), drive, geometry
        )
        assert R == pytest.approx(float(linear.R), rel=1e-4)
        assert T == pytest.approx(float(linear.T), rel=1e-4, abs=1e-6)
        assert K == pytest.approx(float(linear.K), abs=1e-5)

    def test_saturation_reduces_reflectance(self):
        geometry = build_square_array(3, 0.5)
        rows = strong_drive_sweep(geometry, 0.6, 1.5, [0.01, 3.0], progress=False)
        assert rows.shape == (2, 7)
        assert float(rows[1, 1]) < float(rows[0, 1])
        chex.assert_trees_all_close(rows[:, 4], jnp.array([10.0, 10.0]))
        chex.assert_trees_all_close(rows[:, 6], jnp.zeros(2))

    def test_zero_drive_is_weak_drive_limit(self):
        geometry = build_square_array(3, 0.5)
        rows = strong_drive_sweep(geometry, 0.6, 0.5, [0.0, 1e-3], progress=False)
        assert float(rows[0, 1]) > 0.1
        chex.assert_trees_all_close(rows[0, 1:4], rows[1, 1:4], atol=1e-3)

    def test_zero_drive_observables(self):
        geometry = build_square_array(2, 0.5)
        delta = float(resonant_detuning(geometry))
        drive = make_drive_mode("gaussian", 0.6, 0.0, delta)
        state = steady_state_density_matrix(geometry, drive, enumerate_blockade_basis(geometry, 0.5))
        R, T, K = strong_drive_observables(state, geometry, drive, drive)
        unit = make_drive_mode("gaussian", 0.6, 1.0, delta)
        linear = project_scattering(steady_state_single_excitation(geometry, unit), unit, geometry)
        assert R == pytest.approx(float(linear.R), rel=1e-12)
        assert T == pytest.approx(float(linear.T), rel=1e-12)
        assert K == pytest.approx(float(linear.K), abs=1e-12)


if __name__ == "__main__":
    pytest.main([__file__])
