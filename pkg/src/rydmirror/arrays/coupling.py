"""
Module: arrays.coupling
-----------------------
Free-space dyadic Green's tensor and the photon-mediated couplings of an
atomic array.

With ħ = Γ₀ = λ₀ = 1 the couplings are
    Γ^ij = (6π/k₀) p·Im G(r_i − r_j)·p,
    J^ij = −(3π/k₀) p·Re G(r_i − r_j)·p,
with Γ^ii = 1 and the single-atom Lamb shift absorbed into ω₀.

Functions
---------
- `greens_tensor`:
    Full 3×3 Green's tensor G(r, ω₀) for a nonzero displacement
- `projected_green`:
    Closed-form p·G(r)·p for a dipole axis p
- `coupling_matrices`:
    Assembles J, Γ and H = J − iΓ/2 for a geometry
- `effective_hamiltonian_matrix`:
    Single-excitation non-Hermitian Hamiltonian H − (δ + i/2)𝟙
"""

import jax
import jax.numpy as jnp
from beartype import beartype
from beartype.typing import Optional
from jaxtyping import Array, Complex, Float, jaxtyped

from .array_types import (K0, ArrayGeometry, CouplingMatrix,
                          make_coupling_matrix, scalar_float)

jax.config.update("jax_enable_x64", True)


@jaxtyped(typechecker=beartype)
def greens_tensor(
    r: Float[Array, "3"],
    k0: scalar_float = K0,
) -> Complex[Array, "3 3"]:
    """
    Description
    -----------
    Electromagnetic Green's tensor in free space,
        G(r) = e^{ikr}/(4πk²r³) [(k²r² + ikr − 1)𝟙 + (−k²r² − 3ikr + 3) r̂r̂ᵀ].

    Parameters
    ----------
    - `r` (Float[Array, "3"]):
        Displacement vector, must be nonzero
    - `k0` (scalar_float):
        Wavenumber. Default is 2π.

    Returns
    -------
    - `G` (Complex[Array, "3 3"]):
        The Green's tensor

    Raises
    ------
    - ValueError:
        For a zero displacement; the coincident-point value is handled
        through Γ^ii = 1 instead.
    """
    dist: Float[Array, ""] = jnp.linalg.norm(r)
    if not isinstance(dist, jax.core.Tracer) and float(dist) == 0.0:
        raise ValueError("greens_tensor is singular at zero displacement")
    kr = k0 * dist
    r_hat: Float[Array, "3"] = r / dist
    prefactor = jnp.exp(1j * kr) / (4.0 * jnp.pi * k0**2 * dist**3)
    identity_term = (kr**2 + 1j * kr - 1.0) * jnp.eye(3)
    dyadic_term = (-(kr**2) - 3j * kr + 3.0) * jnp.outer(r_hat, r_hat)
    return prefactor * (identity_term + dyadic_term)


@jaxtyped(typechecker=beartype)
def projected_green(
    r: Float[Array, "... 3"],
    dipole_axis: Float[Array, "3"],
    k0: scalar_float = K0,
) -> Complex[Array, "..."]:
    """
    Description
    -----------
    Dipole-projected Green's function p·G(r)·p, evaluated in closed form
    over a batch of displacements. Zero displacements return 0.

    Parameters
    ----------
    - `r` (Float[Array, "... 3"]):
        Displacement vectors
    - `dipole_axis` (Float[Array, "3"]):
        Unit dipole vector p
    - `k0` (scalar_float):
        Wavenumber. Default is 2π.

    Returns
    -------
    - `pGp` (Complex[Array, "..."]):
        The projected Green's function
    """
    dist = jnp.linalg.norm(r, axis=-1)
    is_self = dist == 0.0
    safe = jnp.where(is_self, 1.0, dist)
    kr = k0 * safe
    cos_sq = (r @ dipole_axis / safe) ** 2
    prefactor = jnp.exp(1j * kr) / (4.0 * jnp.pi * k0**2 * safe**3)
    value = prefactor * ((kr**2 + 1j * kr - 1.0) + (-(kr**2) - 3j * kr + 3.0) * cos_sq)
    return jnp.where(is_self, 0.0 + 0.0j, value)


@jaxtyped(typechecker=beartype)
def coupling_matrices(
    geometry: ArrayGeometry,
    k0: scalar_float = K0,
) -> CouplingMatrix:
    """
    Description
    -----------
    Build the coherent and dissipative coupling matrices of an array.

    Parameters
    ----------
    - `geometry` (ArrayGeometry):
        The array
    - `k0` (scalar_float):
        Wavenumber. Default is 2π.

    Returns
    -------
    - `coupling` (CouplingMatrix):
        J (zero diagonal), Γ (unit diagonal) and H = J − iΓ/2 (zero diagonal)

    Flow
    ----
    - Lift the in-plane positions to 3D at z = 0
    - Evaluate p·G·p on all pair displacements
    - Γ = (6π/k₀) Im, J = −(3π/k₀) Re
    - Put Γ₀ = 1 on the diagonal of Γ
    """
    n = geometry.positions.shape[0]
    pos3: Float[Array, "Na 3"] = jnp.concatenate(
        [geometry.positions, jnp.zeros((n, 1))], axis=-1
    )
    diff: Float[Array, "Na Na 3"] = pos3[:, None, :] - pos3[None, :, :]
    pgp: Complex[Array, "Na Na"] = projected_green(diff, geometry.dipole_axis, k0)
    eye = jnp.eye(n)
    gamma: Float[Array, "Na Na"] = (6.0 * jnp.pi / k0) * jnp.imag(pgp) * (1.0 - eye) + eye
    J: Float[Array, "Na Na"] = -(3.0 * jnp.pi / k0) * jnp.real(pgp)
    return make_coupling_matrix(J, gamma)


@jaxtyped(typechecker=beartype)
def effective_hamiltonian_matrix(
    coupling: CouplingMatrix,
    delta: scalar_float,
    shifts: Optional[Float[Array, "Na"]] = None,
) -> Complex[Array, "Na Na"]:
    """
    Description
    -----------
    Non-Hermitian single-excitation Hamiltonian in the frame rotating at the
    laser frequency, H_eff = J − iΓ/2 − δ𝟙, i.e. H − (δ + i/2)𝟙.

    The weak-drive steady state solves H_eff c = Ω.

    Parameters
    ----------
    - `coupling` (CouplingMatrix):
        Couplings of the array
    - `delta` (scalar_float):
        Laser detuning δ
    - `shifts` (Float[Array, "Na"], optional):
        Per-atom level shifts U_j, entering as an effective detuning δ − U_j

    Returns
    -------
    - `h_eff` (Complex[Array, "Na Na"]):
        The effective Hamiltonian
    """
    n = coupling.H.shape[0]
    local = jnp.full((n,), delta, dtype=jnp.float64)
    if shifts is not None:
        local = local - shifts
    return coupling.H - jnp.diag(local + 0.5j)
