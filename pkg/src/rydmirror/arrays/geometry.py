"""
Module: arrays.geometry
-----------------------
Square-array geometries and the Gaussian / plane-wave field modes that
drive and detect them.

Functions
---------
- `build_square_array`:
    N×N square lattice centered at the origin, row-major ordering
- `pairwise_distances`:
    Matrix of in-plane distances between all atoms
- `central_atom_index`:
    Index of the atom closest to the origin
- `mode_amplitude`:
    Unit-peak amplitude of a mode at one in-plane point
- `mode_amplitudes`:
    Mode amplitude at every atom of a geometry
- `mode_norm`:
    Normalization area A of a Gaussian mode
- `drive_rabi`:
    Per-atom Rabi frequencies Ω_j = Ω₀ u(r_j)
- `illuminated_count`:
    Number of illuminated atoms N_i = π w₀²/d²
"""

import jax
import jax.numpy as jnp
from beartype import beartype
from beartype.typing import Tuple, Union
from jaxtyping import Array, Complex, Float, jaxtyped

from .array_types import (ArrayGeometry, DriveMode, ModeNorm,
                          make_array_geometry, make_mode_norm, scalar_float,
                          scalar_numeric)

jax.config.update("jax_enable_x64", True)


@beartype
def build_square_array(
    n_side: int,
    d: scalar_float,
    dipole_axis: Union[str, Float[Array, "3"], Tuple[float, float, float]] = "x",
) -> ArrayGeometry:
    """
    Description
    -----------
    Build an N×N square array in the z = 0 plane, centered at the origin.

    Parameters
    ----------
    - `n_side` (int):
        Atoms per side N ≥ 1
    - `d` (scalar_float):
        Lattice constant in units of λ₀
    - `dipole_axis` (str | Float[Array, "3"]):
        Dipole orientation. Default is "x".

    Returns
    -------
    - `geometry` (ArrayGeometry):
        N² positions {(i − (N−1)/2)d, (j − (N−1)/2)d}, row-major

    Flow
    ----
    - Validate N and d
    - Build the centered 1D coordinate ladder
    - Meshgrid with 'ij' indexing so rows vary slowest
    - Stack into (N², 2) and hand over to the validating factory
    """
    if n_side < 1:
        raise ValueError(f"n_side must be >= 1, got {n_side}")
    if not float(d) > 0.0:
        raise ValueError(f"lattice constant must be positive, got {float(d)}")
    ladder: Float[Array, "N"] = (jnp.arange(n_side) - (n_side - 1) / 2.0) * d
    rows: Float[Array, "N N"]
    cols: Float[Array, "N N"]
    rows, cols = jnp.meshgrid(ladder, ladder, indexing="ij")
    positions: Float[Array, "Na 2"] = jnp.stack([rows.ravel(), cols.ravel()], axis=-1)
    return make_array_geometry(positions, d, dipole_axis, n_side)


@jaxtyped(typechecker=beartype)
def pairwise_distances(geometry: ArrayGeometry) -> Float[Array, "Na Na"]:
    """
    Description
    -----------
    Distances |r_i − r_j| between all atoms, zero on the diagonal.
    """
    diff: Float[Array, "Na Na 2"] = (
        geometry.positions[:, None, :] - geometry.positions[None, :, :]
    )
    sq: Float[Array, "Na Na"] = jnp.sum(diff**2, axis=-1)
    return jnp.sqrt(jnp.where(sq > 0.0, sq, 0.0))


def central_atom_index(geometry: ArrayGeometry) -> int:
    """Row-major first atom among those closest to the origin."""
    radii = jnp.sum(geometry.positions**2, axis=-1)
    return int(jnp.argmin(radii))


@jaxtyped(typechecker=beartype)
def mode_amplitude(
    mode: DriveMode,
    position: Float[Array, "2"],
) -> Complex[Array, ""]:
    """
    Description
    -----------
    Unit-peak amplitude of a mode at an in-plane point of the z = 0 plane.

    Parameters
    ----------
    - `mode` (DriveMode):
        Gaussian or plane-wave mode
    - `position` (Float[Array, "2"]):
        In-plane coordinate ρ

    Returns
    -------
    - `amplitude` (Complex[Array, ""]):
        e^{−|ρ|²/w²} for the Gaussian, e^{i k∥·ρ} for the plane wave
    """
    if mode.kind == "gaussian":
        rho_sq = jnp.sum(position**2)
        return jnp.exp(-rho_sq / mode.waist**2).astype(jnp.complex128)
    return jnp.exp(1j * jnp.dot(mode.in_plane_wavevector, position))


@jaxtyped(typechecker=beartype)
def mode_amplitudes(mode: DriveMode, geometry: ArrayGeometry) -> Complex[Array, "Na"]:
    """Mode amplitude u(r_j) at every atom."""
    return jax.vmap(lambda p: mode_amplitude(mode, p))(geometry.positions)


@beartype
def mode_norm(mode: DriveMode) -> ModeNorm:
    """
    Description
    -----------
    Normalization A = ∫|u|² d²ρ of a unit-peak Gaussian, A = π w²/2.

    Parameters
    ----------
    - `mode` (DriveMode):
        Gaussian mode

    Returns
    -------
    - `norm` (ModeNorm):
        The area A

    Raises
    ------
    - ValueError:
        For plane waves, whose norm is only defined per unit area
    """
    if mode.kind != "gaussian":
        raise ValueError(
            "plane-wave modes have no finite norm; amplitudes are per unit area"
        )
    return make_mode_norm(jnp.pi * mode.waist**2 / 2.0)


@jaxtyped(typechecker=beartype)
def drive_rabi(geometry: ArrayGeometry, drive: DriveMode) -> Complex[Array, "Na"]:
    """Per-atom Rabi frequencies Ω_j = Ω₀ u(r_j)."""
    return drive.peak_rabi * mode_amplitudes(drive, geometry)


@jaxtyped(typechecker=beartype)
def illuminated_count(w0: scalar_numeric, d: scalar_numeric) -> Float[Array, ""]:
    """
    Description
    -----------
    Number of illuminated atoms N_i = π w₀²/d².

    Parameters
    ----------
    - `w0` (scalar_numeric):
        Beam waist
    - `d` (scalar_numeric):
        Lattice constant

    Returns
    -------
    - `n_i` (Float[Array, ""]):
        π w₀²/d²
    """
    return jnp.asarray(jnp.pi * jnp.asarray(w0) ** 2 / jnp.asarray(d) ** 2, dtype=jnp.float64)
